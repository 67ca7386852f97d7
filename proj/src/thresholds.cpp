#include "stratpatch/thresholds.hpp"

namespace stratpatch {

namespace {
constexpr double kSaturated = 1e-9;
}

std::vector<double> ThresholdReport::drop_offs() const {
  std::vector<double> out;
  out.reserve(types.size());
  for (const auto& t : types) out.push_back(t.drop_off);
  return out;
}

ThresholdReport thresholds_of(const ControlTrajectory& control, const CostModel& cost,
                              const std::vector<int>& distances) {
  const TimeGrid& grid = control.grid;
  const int n = grid.n_steps;
  const auto cell_end = [&](int k) { return grid.time(std::min(k + 1, n)); };

  ThresholdReport report;
  for (int j = 0; j < control.num_types(); ++j) {
    TypeThresholds t;
    t.bang_bang = cost.effort_for(j).bang_bang();
    if (j < static_cast<int>(distances.size())) t.distance_from_seed = distances[static_cast<std::size_t>(j)];

    int last_on = -1;
    bool prev = control.u(j, 0) > 0.5;
    for (int k = 0; k <= n; ++k) {
      const bool on = control.u(j, k) > 0.5;
      if (on) last_on = k;
      if (k > 0 && on != prev) ++t.switch_count;
      prev = on;
    }
    t.drop_off = last_on < 0 ? 0.0 : cell_end(last_on);

    int plateau = -1;
    while (plateau < n && control.u(j, plateau + 1) >= 1.0 - kSaturated) ++plateau;
    t.plateau_end = plateau < 0 ? 0.0 : cell_end(plateau);
    t.decay_end = grid.horizon;
    for (int k = 0; k <= n; ++k) {
      if (control.u(j, k) <= kSaturated) {
        t.decay_end = grid.time(k);
        break;
      }
    }
    if (t.decay_end < t.plateau_end) t.decay_end = t.plateau_end;
    report.types.push_back(t);
  }
  return report;
}

}  // namespace stratpatch
