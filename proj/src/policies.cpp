#include "stratpatch/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stratpatch {

namespace {

constexpr double kInvGolden = 0.6180339887498949;

/// Minimizes a unimodal-ish function of a level in [0,1]: uniform grid,
/// then golden-section search inside the bracket around the best point.
template <class F>
std::pair<double, double> minimize_level(F&& objective, int resolution, double tolerance) {
  double best_x = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k < resolution; ++k) {
    const double x = static_cast<double>(k) / (resolution - 1);
    const double f = objective(x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
      best_k = k;
    }
  }
  double lo = static_cast<double>(std::max(best_k - 1, 0)) / (resolution - 1);
  double hi = static_cast<double>(std::min(best_k + 1, resolution - 1)) / (resolution - 1);
  double a = hi - kInvGolden * (hi - lo);
  double b = lo + kInvGolden * (hi - lo);
  double fa = objective(a);
  double fb = objective(b);
  while (hi - lo > tolerance) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - kInvGolden * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + kInvGolden * (hi - lo);
      fb = objective(b);
    }
  }
  for (const auto& [x, f] : {std::pair{a, fa}, std::pair{b, fb}}) {
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  return {best_x, best_f};
}

void set_threshold(ControlTrajectory& control, int type, int index) {
  const int n = control.grid.n_steps;
  control.u.row(type).setZero();
  control.u.row(type).head(index >= n ? n + 1 : index).setOnes();
}

HeuristicResult finish(PolicyKind kind, std::vector<double> parameters, const NetworkModel& model,
                       const CostModel& cost, PatchMode mode, ControlTrajectory control) {
  HeuristicResult out;
  out.kind = kind;
  out.parameters = std::move(parameters);
  out.breakdown = realized_cost(model, cost, mode, control);
  out.cost = out.breakdown.total;
  out.control = std::move(control);
  return out;
}

void check_resolution(const PolicySearch& search) {
  if (search.grid_resolution < 2) throw std::invalid_argument("grid resolution must be >= 2");
  if (search.threshold_stride < 1) throw std::invalid_argument("threshold stride must be >= 1");
}

}  // namespace

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Static:
      return "static";
    case PolicyKind::StratifiedStatic:
      return "stratified_static";
    case PolicyKind::SpatiallyStatic:
      return "spatially_static";
    case PolicyKind::SimplifiedHomogeneous:
      return "simplified_homogeneous";
    case PolicyKind::BruteForceThreshold:
      return "brute_force_threshold";
  }
  return "unknown";
}

CostBreakdown realized_cost(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                            const ControlTrajectory& control) {
  return evaluate_cost(model, cost, mode, control, integrate_forward(model, mode, control));
}

HeuristicResult static_policy(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                              const PolicySearch& search) {
  check_resolution(search);
  const TimeGrid grid(model.horizon, search.n_steps);
  const int m = model.num_types();
  const auto objective = [&](double level) {
    return realized_cost(model, cost, mode, ControlTrajectory::constant(grid, m, level)).total;
  };
  const auto [level, value] = minimize_level(objective, search.grid_resolution,
                                             search.level_tolerance);
  return finish(PolicyKind::Static, {level}, model, cost, mode,
                ControlTrajectory::constant(grid, m, level));
}

HeuristicResult stratified_static_policy(const NetworkModel& model, const CostModel& cost,
                                         PatchMode mode, const PolicySearch& search) {
  check_resolution(search);
  const TimeGrid grid(model.horizon, search.n_steps);
  const int m = model.num_types();

  // Start from the best common level so the result never loses to Static.
  const HeuristicResult common = static_policy(model, cost, mode, search);
  ControlTrajectory control = common.control;
  std::vector<double> levels(static_cast<std::size_t>(m), common.parameters.front());
  double current = common.cost;

  for (int sweep = 0; sweep < search.sweeps; ++sweep) {
    const double before = current;
    for (int j = 0; j < m; ++j) {
      const auto objective = [&](double level) {
        control.u.row(j).setConstant(level);
        return realized_cost(model, cost, mode, control).total;
      };
      const auto [level, value] =
          minimize_level(objective, search.grid_resolution, search.level_tolerance);
      if (value < current) {
        levels[static_cast<std::size_t>(j)] = level;
        current = value;
      }
      control.u.row(j).setConstant(levels[static_cast<std::size_t>(j)]);
    }
    if (before - current < search.sweep_improvement) break;
  }
  return finish(PolicyKind::StratifiedStatic, levels, model, cost, mode, std::move(control));
}

HeuristicResult spatially_static_policy(const NetworkModel& model, const CostModel& cost,
                                        PatchMode mode, const PolicySearch& search) {
  check_resolution(search);
  const TimeGrid grid(model.horizon, search.n_steps);
  const int m = model.num_types();
  const int n = grid.n_steps;
  ControlTrajectory control = ControlTrajectory::constant(grid, m, 0.0);
  const auto objective = [&](int index) {
    for (int j = 0; j < m; ++j) set_threshold(control, j, index);
    return realized_cost(model, cost, mode, control).total;
  };

  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int index : threshold_indices(n, search.threshold_stride)) {
    const double value = objective(index);
    if (value < best_cost) {
      best_cost = value;
      best = index;
    }
  }
  const int lo = std::max(0, best - search.threshold_stride + 1);
  const int hi = std::min(n, best + search.threshold_stride - 1);
  for (int index = lo; index <= hi; ++index) {
    const double value = objective(index);
    if (value < best_cost || (value == best_cost && index < best)) {
      best_cost = value;
      best = index;
    }
  }
  for (int j = 0; j < m; ++j) set_threshold(control, j, best);
  return finish(PolicyKind::SpatiallyStatic, {grid.time(best)}, model, cost, mode,
                std::move(control));
}

NetworkModel homogeneous_surrogate(const NetworkModel& model, bool include_diagonal) {
  const int m = model.num_types();
  const auto mean_rate = [&](const Matrix& a) {
    if (include_diagonal || m == 1) return a.mean();
    return (a.sum() - a.trace()) / (static_cast<double>(m) * (m - 1));
  };
  NetworkModel out;
  out.beta = Matrix::Constant(1, 1, mean_rate(model.beta));
  out.beta_bar = Matrix::Constant(1, 1, mean_rate(model.beta_bar));
  out.pi = Matrix::Constant(1, 1, model.pi.mean());
  out.s0 = Vector::Constant(1, model.s0.mean());
  out.i0 = Vector::Constant(1, model.i0.mean());
  out.r0 = Vector::Constant(1, model.r0.mean());
  out.horizon = model.horizon;
  return out;
}

HeuristicResult simplified_homogeneous_policy(const NetworkModel& model, const CostModel& cost,
                                              PatchMode mode, const PolicySearch& search) {
  const NetworkModel surrogate = homogeneous_surrogate(model, search.surrogate_include_diagonal);
  CostModel surrogate_cost = cost;
  surrogate_cost.effort = {cost.effort_for(0)};
  SweepConfig config = search.surrogate_solver;
  config.n_steps = search.n_steps;
  const SolveResult solved = forward_backward_sweep(surrogate, surrogate_cost, mode, config);

  const TimeGrid grid(model.horizon, search.n_steps);
  ControlTrajectory control = ControlTrajectory::constant(grid, model.num_types(), 0.0);
  for (int j = 0; j < model.num_types(); ++j) control.u.row(j) = solved.control.u.row(0);
  std::vector<double> parameters;
  if (!solved.thresholds.types.empty()) parameters.push_back(solved.thresholds.types[0].drop_off);
  return finish(PolicyKind::SimplifiedHomogeneous, parameters, model, cost, mode,
                std::move(control));
}

std::vector<int> threshold_indices(int n_steps, int stride) {
  if (stride < 1) throw std::invalid_argument("threshold stride must be >= 1");
  std::vector<int> out;
  for (int k = 0; k < n_steps; k += stride) out.push_back(k);
  out.push_back(n_steps);
  return out;
}

HeuristicResult brute_force_threshold_oracle(const NetworkModel& model, const CostModel& cost,
                                             PatchMode mode, int n_steps,
                                             const std::vector<std::vector<int>>& threshold_grid,
                                             long long max_combinations) {
  const int m = model.num_types();
  if (static_cast<int>(threshold_grid.size()) != m) {
    throw std::invalid_argument("threshold grid needs one candidate list per type");
  }
  long long combinations = 1;
  for (const auto& candidates : threshold_grid) {
    if (candidates.empty()) throw std::invalid_argument("empty threshold candidate list");
    for (int k : candidates) {
      if (k < 0 || k > n_steps) throw std::invalid_argument("threshold index outside [0, N]");
    }
    combinations *= static_cast<long long>(candidates.size());
    if (combinations > max_combinations) {
      throw SearchBudgetError("threshold search exceeds " + std::to_string(max_combinations) +
                              " combinations");
    }
  }

  const TimeGrid grid(model.horizon, n_steps);
  ControlTrajectory control = ControlTrajectory::constant(grid, m, 0.0);
  std::vector<std::size_t> odometer(static_cast<std::size_t>(m), 0);
  std::vector<int> best(static_cast<std::size_t>(m), 0);
  double best_cost = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j) set_threshold(control, j, threshold_grid[static_cast<std::size_t>(j)][0]);

  while (true) {
    const double value = realized_cost(model, cost, mode, control).total;
    if (value < best_cost) {
      best_cost = value;
      for (int j = 0; j < m; ++j) {
        best[static_cast<std::size_t>(j)] =
            threshold_grid[static_cast<std::size_t>(j)][odometer[static_cast<std::size_t>(j)]];
      }
    }
    int j = m - 1;
    for (; j >= 0; --j) {
      auto& digit = odometer[static_cast<std::size_t>(j)];
      const auto& candidates = threshold_grid[static_cast<std::size_t>(j)];
      if (++digit < candidates.size()) {
        set_threshold(control, j, candidates[digit]);
        break;
      }
      digit = 0;
      set_threshold(control, j, candidates[0]);
    }
    if (j < 0) break;
  }

  std::vector<double> times;
  for (int j = 0; j < m; ++j) {
    set_threshold(control, j, best[static_cast<std::size_t>(j)]);
    times.push_back(grid.time(best[static_cast<std::size_t>(j)]));
  }
  return finish(PolicyKind::BruteForceThreshold, times, model, cost, mode, std::move(control));
}

HeuristicResult refined_threshold_oracle(const NetworkModel& model, const CostModel& cost,
                                         PatchMode mode, int n_steps, int stride,
                                         long long max_combinations) {
  if (stride < 1) throw std::invalid_argument("threshold stride must be at least 1");
  const int m = model.num_types();
  const TimeGrid grid(model.horizon, n_steps);
  HeuristicResult best = brute_force_threshold_oracle(
      model, cost, mode, n_steps,
      std::vector<std::vector<int>>(static_cast<std::size_t>(m), threshold_indices(n_steps, stride)),
      max_combinations);

  // Each level searches one old stride around the incumbent at a 5x finer stride.
  while (stride > 1) {
    const int fine_stride = std::max(1, stride / 5);
    std::vector<std::vector<int>> window(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      const int centre =
          static_cast<int>(std::lround(best.parameters[static_cast<std::size_t>(j)] / grid.dt()));
      auto& axis = window[static_cast<std::size_t>(j)];
      for (int offset = -((stride - 1) / fine_stride) * fine_stride; offset < stride;
           offset += fine_stride) {
        const int k = centre + offset;
        if (k >= 0 && k <= n_steps) axis.push_back(k);
      }
    }
    HeuristicResult level =
        brute_force_threshold_oracle(model, cost, mode, n_steps, window, max_combinations);
    if (level.cost <= best.cost) best = std::move(level);
    stride = fine_stride;
  }
  best.kind = PolicyKind::BruteForceThreshold;
  return best;
}

}  // namespace stratpatch
