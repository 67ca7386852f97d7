#pragma once

#include "stratpatch/pmp.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace stratpatch {

enum class PolicyKind {
  Static,
  StratifiedStatic,
  SpatiallyStatic,
  SimplifiedHomogeneous,
  BruteForceThreshold,
};

std::string to_string(PolicyKind kind);

/// A baseline policy with its realized cost on the true model.  `parameters`
/// holds constant levels (static kinds) or switch times (threshold kinds).
struct HeuristicResult {
  PolicyKind kind = PolicyKind::Static;
  std::vector<double> parameters;
  double cost = 0.0;
  CostBreakdown breakdown;
  ControlTrajectory control;
};

class SearchBudgetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Search settings shared by the heuristics.
struct PolicySearch {
  int n_steps = 3500;
  int grid_resolution = 21;  // constant-level grid points on [0,1]
  double level_tolerance = 1e-4;
  int sweeps = 5;
  double sweep_improvement = 1e-6;
  int threshold_stride = 10;  // coarse stride (in cells) for threshold scans
  bool surrogate_include_diagonal = true;
  SweepConfig surrogate_solver{};
};

/// Realized cost of a control: forward simulation plus evaluate_cost.
CostBreakdown realized_cost(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                            const ControlTrajectory& control);

/// One constant level shared by every type.
HeuristicResult static_policy(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                              const PolicySearch& search = {});

/// Per-type constant levels by cyclic coordinate descent.
HeuristicResult stratified_static_policy(const NetworkModel& model, const CostModel& cost,
                                         PatchMode mode, const PolicySearch& search = {});

/// One switch time shared by every type: u = 1 before it, 0 after.
HeuristicResult spatially_static_policy(const NetworkModel& model, const CostModel& cost,
                                        PatchMode mode, const PolicySearch& search = {});

/// One-type model whose rates are the mean of the M x M rate matrices and
/// whose initial fractions are the type averages.
NetworkModel homogeneous_surrogate(const NetworkModel& model, bool include_diagonal = true);

/// Solves the surrogate and applies its control to every type of `model`.
HeuristicResult simplified_homogeneous_policy(const NetworkModel& model, const CostModel& cost,
                                              PatchMode mode, const PolicySearch& search = {});

/// Exhaustive search over per-type single-switch controls.  Each entry of
/// `threshold_grid` lists candidate switch indices (0..N) for that type.
/// Throws SearchBudgetError above `max_combinations`.
HeuristicResult brute_force_threshold_oracle(const NetworkModel& model, const CostModel& cost,
                                             PatchMode mode, int n_steps,
                                             const std::vector<std::vector<int>>& threshold_grid,
                                             long long max_combinations = 1'000'000);

/// Uniform threshold grid with the given stride, endpoints included.
std::vector<int> threshold_indices(int n_steps, int stride);

/// Coarse exhaustive pass at `stride`, then exhaustive passes at successively
/// 5x finer strides within one previous stride of the incumbent, down to
/// single cells.
HeuristicResult refined_threshold_oracle(const NetworkModel& model, const CostModel& cost,
                                         PatchMode mode, int n_steps, int stride,
                                         long long max_combinations = 1'000'000);

}  // namespace stratpatch
