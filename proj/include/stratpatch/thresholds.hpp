#pragma once

#include "stratpatch/costs.hpp"

#include <vector>

namespace stratpatch {

/// Switching summary for one type's control.  Times are at grid resolution:
/// a cell that patches counts up to its right edge.
struct TypeThresholds {
  double drop_off = 0.0;      // end of the last cell with u > 0.5
  double plateau_end = 0.0;   // end of the initial run at u = 1
  double decay_end = 0.0;     // first grid time with u = 0 (T if never)
  int switch_count = 0;       // changes of the control binarized at 0.5
  bool bang_bang = true;      // shape family of the type's effort
  int distance_from_seed = -1;
};

struct ThresholdReport {
  std::vector<TypeThresholds> types;

  [[nodiscard]] std::vector<double> drop_offs() const;
};

/// Grid-resolution thresholds of every type's control.  `distances` may be
/// empty when no topology is known.
ThresholdReport thresholds_of(const ControlTrajectory& control, const CostModel& cost,
                              const std::vector<int>& distances = {});

}  // namespace stratpatch
