#pragma once

#include "stratpatch/policies.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stratpatch {

/// A fully specified benchmark problem.
struct Scenario {
  std::string id;
  Topology topology;
  SeedSpec seed;
  CostModel cost;
  PatchMode mode = PatchMode::NonReplicative;

  [[nodiscard]] NetworkModel model() const { return build_topology(topology, seed); }
};

/// Three-region linear chain, type-A cost, non-replicative.
Scenario three_region_scenario(double pi);
/// Ten-region (or m-region) linear chain with the given cross coefficient.
Scenario linear_pattern_scenario(int m, double x_coef, double pi);
/// Star with the hub at index 0 and the infection seeded at peripheral 1.
Scenario star_pattern_scenario(int peripherals, double pi);
/// Linear chain of m regions, replicative, K_u = 0.2, seed I = 0.2.
Scenario cost_comparison_scenario(int m);
/// Complete topology of m regions, K_u = 0.2, seed I = 0.2.
Scenario rep_vs_nonrep_scenario(int m, PatchMode mode);

struct ExperimentOptions {
  SweepConfig solver{};
  PolicySearch search{};
  int threads = 0;  // 0: take STRATPATCH_THREADS, else hardware concurrency
};

/// Worker count from STRATPATCH_THREADS (>= 1), or the hardware concurrency.
int default_thread_count();

/// Runs task(0..count-1) on up to `threads` workers.  Results must be written
/// to per-index slots so the outcome does not depend on scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& task);

ThresholdReport extract_thresholds(const SolveResult& result, const CostModel& cost,
                                   const std::optional<Topology>& topology = std::nullopt,
                                   int seed_type = 0);

struct PolicyRow {
  std::string policy;
  std::vector<double> parameters;
  double cost = 0.0;
  double gap_vs_optimal = 0.0;  // (cost - optimal) / optimal
};

struct ComparisonTable {
  std::string scenario;
  int num_types = 0;
  double optimal = 0.0;
  bool converged = true;
  std::vector<PolicyRow> rows;  // first row is the optimal policy

  [[nodiscard]] const PolicyRow& row(const std::string& policy) const;
  [[nodiscard]] bool optimal_is_minimum(double slack = 1e-6) const;
  /// Relative gap of `policy` over the optimum, (J_policy - J*) / J*.
  [[nodiscard]] double gap(const std::string& policy) const;
  /// Smallest gap among the static and stratified static policies.
  [[nodiscard]] double best_static_gap() const;
};

inline constexpr const char* kOptimalPolicy = "stratified_dynamic";

/// Solves the scenario and evaluates the four heuristics against it.
ComparisonTable compare_policies(const Scenario& scenario, const ExperimentOptions& options = {});

struct LinearPatternRun {
  double x_coef = 0.0;
  double pi = 0.0;
  ThresholdReport report;
  bool converged = true;
};

/// Drop-off times over a linear chain for each cross coefficient.
std::vector<LinearPatternRun> replicate_linear_pattern(int m, const std::vector<double>& x_coefs,
                                                       double pi,
                                                       const ExperimentOptions& options = {});

struct StarPatternRun {
  int peripherals = 0;
  double pi = 0.0;
  ThresholdReport report;  // type 0 is the hub
  bool converged = true;

  [[nodiscard]] double hub_drop_off() const;
  [[nodiscard]] double min_peripheral_drop_off() const;
  [[nodiscard]] double max_peripheral_drop_off() const;
};

std::vector<StarPatternRun> replicate_star_pattern(const std::vector<int>& peripheral_counts,
                                                   double pi,
                                                   const ExperimentOptions& options = {});

std::vector<ComparisonTable> replicate_cost_comparison(const std::vector<int>& m_range,
                                                       const ExperimentOptions& options = {});

struct ModeComparison {
  int m = 0;
  double replicative = 0.0;
  double nonreplicative = 0.0;
  bool converged = true;

  /// Relative advantage of replicative patching, (J_nonrep - J_rep) / J_nonrep.
  [[nodiscard]] double advantage() const;
};

std::vector<ModeComparison> replicate_rep_vs_nonrep(const std::vector<int>& m_range,
                                                    const ExperimentOptions& options = {});

}  // namespace stratpatch
