#include "stratpatch/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace stratpatch {

namespace {

int resolve_threads(int requested) { return requested > 0 ? requested : default_thread_count(); }

}  // namespace

Scenario three_region_scenario(double pi) {
  Scenario s;
  s.id = "three_region_pi" + std::to_string(static_cast<int>(pi));
  s.topology.m = 3;
  s.seed.pi_scalar = pi;
  s.cost = CostModel::type_a(1.0, 0.5);
  return s;
}

Scenario linear_pattern_scenario(int m, double x_coef, double pi) {
  Scenario s;
  s.id = "linear_m" + std::to_string(m);
  s.topology.m = m;
  s.topology.cross_coef = x_coef;
  s.seed.pi_scalar = pi;
  s.cost = CostModel::type_a(1.0, 0.5);
  return s;
}

Scenario star_pattern_scenario(int peripherals, double pi) {
  Scenario s;
  s.id = "star_p" + std::to_string(peripherals);
  s.topology.kind = TopologyKind::Star;
  s.topology.m = peripherals + 1;
  s.topology.hub = 0;
  s.seed.infected_seed = 1;
  s.seed.i0_seed = 0.6;
  s.seed.pi_scalar = pi;
  s.cost = CostModel::type_b(1.0, 0.5);
  return s;
}

Scenario cost_comparison_scenario(int m) {
  Scenario s;
  s.id = "linear_rep_m" + std::to_string(m);
  s.topology.m = m;
  s.seed.i0_seed = 0.2;
  s.seed.pi_scalar = 1.0;
  s.cost = CostModel::type_a(1.0, 0.2);
  s.mode = PatchMode::Replicative;
  return s;
}

Scenario rep_vs_nonrep_scenario(int m, PatchMode mode) {
  Scenario s;
  s.id = "complete_" + to_string(mode) + "_m" + std::to_string(m);
  s.topology.kind = TopologyKind::Complete;
  s.topology.m = m;
  s.seed.i0_seed = 0.2;
  s.seed.pi_scalar = 1.0;
  s.cost = CostModel::type_a(1.0, 0.2);
  s.mode = mode;
  return s;
}

int default_thread_count() {
  if (const char* env = std::getenv("STRATPATCH_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value >= 1) return static_cast<int>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  const int workers = std::min(std::max(threads, 1), count);
  if (workers <= 1) {
    for (int k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  const auto worker = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        task(k);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ThresholdReport extract_thresholds(const SolveResult& result, const CostModel& cost,
                                   const std::optional<Topology>& topology, int seed_type) {
  std::vector<int> distances;
  if (topology) distances = topology->distances_from(seed_type);
  return thresholds_of(result.control, cost, distances);
}

const PolicyRow& ComparisonTable::row(const std::string& policy) const {
  for (const auto& r : rows) {
    if (r.policy == policy) return r;
  }
  throw std::out_of_range("no comparison row for policy '" + policy + "'");
}

bool ComparisonTable::optimal_is_minimum(double slack) const {
  return std::all_of(rows.begin(), rows.end(),
                     [&](const PolicyRow& r) { return optimal <= r.cost + slack; });
}

double ComparisonTable::gap(const std::string& policy) const {
  return row(policy).gap_vs_optimal;
}

double ComparisonTable::best_static_gap() const {
  return std::min(gap(to_string(PolicyKind::Static)),
                  gap(to_string(PolicyKind::StratifiedStatic)));
}

ComparisonTable compare_policies(const Scenario& scenario, const ExperimentOptions& options) {
  const NetworkModel model = scenario.model();
  SweepConfig solver = options.solver;
  PolicySearch search = options.search;
  search.n_steps = solver.n_steps;
  search.surrogate_solver = solver;

  const SolveResult optimal = forward_backward_sweep(model, scenario.cost, scenario.mode, solver);
  ComparisonTable table;
  table.scenario = scenario.id;
  table.num_types = model.num_types();
  table.optimal = optimal.cost.total;
  table.converged = optimal.convergence.converged;

  std::vector<double> drop_offs = optimal.thresholds.drop_offs();
  table.rows.push_back({kOptimalPolicy, drop_offs, optimal.cost.total, 0.0});

  std::vector<HeuristicResult> heuristics(4);
  parallel_for(4, resolve_threads(options.threads), [&](int k) {
    switch (k) {
      case 0:
        heuristics[0] = static_policy(model, scenario.cost, scenario.mode, search);
        break;
      case 1:
        heuristics[1] = stratified_static_policy(model, scenario.cost, scenario.mode, search);
        break;
      case 2:
        heuristics[2] = spatially_static_policy(model, scenario.cost, scenario.mode, search);
        break;
      default:
        heuristics[3] = simplified_homogeneous_policy(model, scenario.cost, scenario.mode, search);
        break;
    }
  });
  for (const auto& h : heuristics) {
    const double gap = table.optimal != 0.0 ? (h.cost - table.optimal) / table.optimal : 0.0;
    table.rows.push_back({to_string(h.kind), h.parameters, h.cost, gap});
  }
  return table;
}

std::vector<LinearPatternRun> replicate_linear_pattern(int m, const std::vector<double>& x_coefs,
                                                       double pi,
                                                       const ExperimentOptions& options) {
  std::vector<LinearPatternRun> runs(x_coefs.size());
  parallel_for(static_cast<int>(x_coefs.size()), resolve_threads(options.threads), [&](int k) {
    const auto idx = static_cast<std::size_t>(k);
    const Scenario scenario = linear_pattern_scenario(m, x_coefs[idx], pi);
    const SolveResult result =
        forward_backward_sweep(scenario.model(), scenario.cost, scenario.mode, options.solver);
    runs[idx] = {x_coefs[idx], pi,
                 extract_thresholds(result, scenario.cost, scenario.topology,
                                    scenario.seed.infected_seed),
                 result.convergence.converged};
  });
  return runs;
}

double StarPatternRun::hub_drop_off() const { return report.types.at(0).drop_off; }

double StarPatternRun::min_peripheral_drop_off() const {
  double out = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < report.types.size(); ++j) out = std::min(out, report.types[j].drop_off);
  return out;
}

double StarPatternRun::max_peripheral_drop_off() const {
  double out = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < report.types.size(); ++j) out = std::max(out, report.types[j].drop_off);
  return out;
}

std::vector<StarPatternRun> replicate_star_pattern(const std::vector<int>& peripheral_counts,
                                                   double pi, const ExperimentOptions& options) {
  std::vector<StarPatternRun> runs(peripheral_counts.size());
  parallel_for(static_cast<int>(peripheral_counts.size()), resolve_threads(options.threads),
               [&](int k) {
                 const auto idx = static_cast<std::size_t>(k);
                 const Scenario scenario = star_pattern_scenario(peripheral_counts[idx], pi);
                 const SolveResult result = forward_backward_sweep(
                     scenario.model(), scenario.cost, scenario.mode, options.solver);
                 runs[idx] = {peripheral_counts[idx], pi,
                              extract_thresholds(result, scenario.cost, scenario.topology,
                                                 scenario.seed.infected_seed),
                              result.convergence.converged};
               });
  return runs;
}

std::vector<ComparisonTable> replicate_cost_comparison(const std::vector<int>& m_range,
                                                       const ExperimentOptions& options) {
  std::vector<ComparisonTable> tables(m_range.size());
  ExperimentOptions inner = options;
  inner.threads = 1;
  parallel_for(static_cast<int>(m_range.size()), resolve_threads(options.threads), [&](int k) {
    const auto idx = static_cast<std::size_t>(k);
    tables[idx] = compare_policies(cost_comparison_scenario(m_range[idx]), inner);
  });
  return tables;
}

double ModeComparison::advantage() const {
  return nonreplicative != 0.0 ? (nonreplicative - replicative) / nonreplicative : 0.0;
}

std::vector<ModeComparison> replicate_rep_vs_nonrep(const std::vector<int>& m_range,
                                                    const ExperimentOptions& options) {
  const int count = static_cast<int>(m_range.size());
  std::vector<SolveResult> results(static_cast<std::size_t>(2 * count));
  parallel_for(2 * count, resolve_threads(options.threads), [&](int k) {
    const PatchMode mode = k % 2 == 0 ? PatchMode::Replicative : PatchMode::NonReplicative;
    const Scenario scenario = rep_vs_nonrep_scenario(m_range[static_cast<std::size_t>(k / 2)], mode);
    results[static_cast<std::size_t>(k)] =
        forward_backward_sweep(scenario.model(), scenario.cost, mode, options.solver);
  });
  std::vector<ModeComparison> out;
  for (int k = 0; k < count; ++k) {
    const SolveResult& rep = results[static_cast<std::size_t>(2 * k)];
    const SolveResult& nonrep = results[static_cast<std::size_t>(2 * k + 1)];
    out.push_back({m_range[static_cast<std::size_t>(k)], rep.cost.total, nonrep.cost.total,
                   rep.convergence.converged && nonrep.convergence.converged});
  }
  return out;
}

}  // namespace stratpatch
