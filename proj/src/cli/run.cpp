#include "stratpatch/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace stratpatch::cli {

namespace {

namespace fs = std::filesystem;

constexpr long long kOracleBudget = 20'000;
constexpr double kOptimalSlack = 1e-6;

class Outcome {
 public:
  Outcome(const fs::path& dir, std::ostream& log, bool quiet) : dir_(dir), log_(log), quiet_(quiet) {}

  void note(const std::string& line) {
    if (!quiet_) log_ << line << '\n';
  }

  void fail(int code, const std::string& line) {
    if (code > code_) code_ = code;
    problems_.push_back(line);
    log_ << "error: " << line << '\n';
  }

  template <typename Writer>
  void write(const std::string& name, Writer&& writer) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    writer(out);
    note("wrote " + (dir_ / name).string());
  }

  int finish() {
    if (code_ != kSuccess) {
      write("diagnostics.txt", [&](std::ostream& out) {
        out << "exit_code: " << code_ << '\n';
        for (const auto& p : problems_) out << p << '\n';
      });
    }
    return code_;
  }

 private:
  fs::path dir_;
  std::ostream& log_;
  bool quiet_;
  int code_ = kSuccess;
  std::vector<std::string> problems_;
};

std::string hash_hex(const ScenarioConfig& config) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a(emit_config(config));
  return out.str();
}

void check_convergence(Outcome& outcome, const std::string& label, bool converged) {
  if (!converged) outcome.fail(kNotConverged, label + ": sweep did not converge");
}

void check_structure(Outcome& outcome, const SolveResult& result, const CostModel& cost) {
  const StructureReport report = verify_structure(result, cost);
  if (!report.guaranteed_by_theory) {
    for (const auto& n : report.notes) outcome.note("note: " + n);
    return;
  }
  if (!result.convergence.converged) return;
  if (!report.controls_ok()) outcome.fail(kInvariantBreach, "optimal control violates threshold structure");
  if (!report.lemmas_ok()) outcome.fail(kInvariantBreach, "costates violate sign or monotonicity properties");
}

void run_solve(const ScenarioConfig& config, Outcome& outcome) {
  const auto start = std::chrono::steady_clock::now();
  const Scenario scenario = config.scenario();
  const SolveResult result =
      forward_backward_sweep(scenario.model(), scenario.cost, scenario.mode, config.solver);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const ThresholdReport report = extract_thresholds(result, scenario.cost, scenario.topology,
                                                    scenario.seed.infected_seed);
  outcome.note("J = " + format_number(result.cost.total) + " after " +
               std::to_string(result.convergence.iterations) + " iterations");

  if (config.outputs.trajectory) {
    outcome.write("trajectory.csv", [&](std::ostream& out) { write_trajectory_csv(out, result); });
  }
  if (config.outputs.summary) {
    outcome.write("summary.csv", [&](std::ostream& out) { write_summary_csv(out, result, report); });
  }
  if (config.outputs.manifest) {
    outcome.write("manifest.txt", [&](std::ostream& out) {
      out << "tool_version: " << kToolVersion << '\n'
          << "schema: " << config.schema << '\n'
          << "config_hash: " << hash_hex(config) << '\n'
          << "wall_clock_seconds: " << format_number(seconds) << '\n'
          << "converged: " << (result.convergence.converged ? "true" : "false") << '\n'
          << "iterations: " << result.convergence.iterations << '\n'
          << "residual: " << format_number(result.convergence.residual) << '\n'
          << "final_step: " << format_number(result.convergence.final_relaxation) << '\n';
    });
  }
  check_convergence(outcome, scenario.id, result.convergence.converged);
  check_structure(outcome, result, scenario.cost);
}

ExperimentOptions experiment_options(const ScenarioConfig& config) {
  ExperimentOptions options;
  options.solver = config.solver;
  return options;
}

void run_compare(const ScenarioConfig& config, Outcome& outcome) {
  const ComparisonTable table = compare_policies(config.scenario(), experiment_options(config));
  outcome.write("comparison.csv", [&](std::ostream& out) { write_comparison_csv(out, table); });
  check_convergence(outcome, table.scenario, table.converged);
  if (table.converged && !table.optimal_is_minimum(kOptimalSlack * std::abs(table.optimal))) {
    outcome.fail(kInvariantBreach, "a heuristic beats the optimal policy");
  }
}

void run_figures(const ScenarioConfig& config, Outcome& outcome) {
  const ExperimentOptions options = experiment_options(config);

  std::vector<LinearPatternRun> linear;
  for (const double pi : {0.0, 1.0}) {
    auto runs = replicate_linear_pattern(10, {0.1, 0.2, 0.4, 0.6}, pi, options);
    linear.insert(linear.end(), runs.begin(), runs.end());
  }
  outcome.write("fig2_linear_pattern.csv",
                [&](std::ostream& out) { write_linear_pattern_csv(out, linear); });
  for (const auto& run : linear) {
    check_convergence(outcome, "linear pattern x_coef " + format_number(run.x_coef), run.converged);
  }

  std::vector<StarPatternRun> star;
  for (const double pi : {0.0, 1.0}) {
    auto runs = replicate_star_pattern({1, 2, 3, 5, 8}, pi, options);
    star.insert(star.end(), runs.begin(), runs.end());
  }
  outcome.write("fig3_star_pattern.csv", [&](std::ostream& out) { write_star_pattern_csv(out, star); });
  for (const auto& run : star) {
    check_convergence(outcome, "star pattern p " + std::to_string(run.peripherals), run.converged);
  }

  const auto tables = replicate_cost_comparison({2, 3, 4, 5}, options);
  outcome.write("fig4_cost_comparison.csv",
                [&](std::ostream& out) { write_cost_comparison_csv(out, tables); });
  for (const auto& table : tables) {
    check_convergence(outcome, table.scenario, table.converged);
    if (table.converged && !table.optimal_is_minimum(kOptimalSlack * std::abs(table.optimal))) {
      outcome.fail(kInvariantBreach, table.scenario + ": a heuristic beats the optimal policy");
    }
  }

  const auto modes = replicate_rep_vs_nonrep({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, options);
  outcome.write("fig5_rep_vs_nonrep.csv",
                [&](std::ostream& out) { write_mode_comparison_csv(out, modes); });
  for (const auto& row : modes) {
    check_convergence(outcome, "complete m " + std::to_string(row.m), row.converged);
    if (row.converged && row.replicative > row.nonreplicative + kOptimalSlack) {
      outcome.fail(kInvariantBreach, "complete m " + std::to_string(row.m) +
                                         ": replicative cost exceeds non-replicative");
    }
  }
}

/// Smallest stride of the form 10 * 2^k whose coarse grid fits the budget.
int oracle_stride(int n_steps, int m) {
  int stride = 10;
  while (std::pow(n_steps / stride + 2.0, m) > static_cast<double>(kOracleBudget)) stride *= 2;
  return stride;
}

void run_oracle(const ScenarioConfig& config, Outcome& outcome) {
  const Scenario scenario = config.scenario();
  const NetworkModel model = scenario.model();
  for (int j = 0; j < model.num_types(); ++j) {
    if (!scenario.cost.effort_for(j).bang_bang()) {
      throw ConfigError("cost.effort.shape", "the threshold oracle needs a linear or concave effort");
    }
  }
  const SolveResult sweep = forward_backward_sweep(model, scenario.cost, scenario.mode, config.solver);
  const int stride = oracle_stride(config.solver.n_steps, model.num_types());
  const HeuristicResult oracle = refined_threshold_oracle(model, scenario.cost, scenario.mode,
                                                          config.solver.n_steps, stride, kOracleBudget);
  const std::vector<double> sweep_drops = sweep.thresholds.drop_offs();
  const double dt = sweep.control.grid.dt();

  outcome.write("oracle.csv", [&](std::ostream& out) {
    out << "type,sweep_drop_off,oracle_drop_off,delta,delta_cells\n";
    for (std::size_t j = 0; j < oracle.parameters.size(); ++j) {
      const double delta = sweep_drops[j] - oracle.parameters[j];
      out << j + 1 << ',' << format_number(sweep_drops[j]) << ','
          << format_number(oracle.parameters[j]) << ',' << format_number(delta) << ','
          << std::lround(delta / dt) << '\n';
    }
  });
  const double relative = (sweep.cost.total - oracle.cost) / std::abs(oracle.cost);
  outcome.write("oracle_summary.csv", [&](std::ostream& out) {
    out << "quantity,value\n"
        << "J_sweep," << format_number(sweep.cost.total) << '\n'
        << "J_oracle," << format_number(oracle.cost) << '\n'
        << "relative_delta," << format_number(relative) << '\n'
        << "coarse_stride," << stride << '\n'
        << "sweep_converged," << (sweep.convergence.converged ? 1 : 0) << '\n';
  });
  outcome.note("sweep J = " + format_number(sweep.cost.total) +
               ", oracle J = " + format_number(oracle.cost));
  check_convergence(outcome, scenario.id, sweep.convergence.converged);
}

}  // namespace

int run(Subcommand command, const ScenarioConfig& config, const RunOptions& options,
        std::ostream& log) {
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) {
    log << "error: cannot create " << options.out_dir.string() << ": " << ec.message() << '\n';
    return kConfigError;
  }
  Outcome outcome(options.out_dir, log, options.quiet);
  try {
    switch (command) {
      case Subcommand::Solve:
        run_solve(config, outcome);
        break;
      case Subcommand::Compare:
        run_compare(config, outcome);
        break;
      case Subcommand::Figures:
        run_figures(config, outcome);
        break;
      case Subcommand::Oracle:
        run_oracle(config, outcome);
        break;
    }
  } catch (const ConfigError& e) {
    outcome.fail(kConfigError, e.what());
  } catch (const ModelError& e) {
    outcome.fail(kConfigError, e.what());
  } catch (const SearchBudgetError& e) {
    outcome.fail(kConfigError, e.what());
  } catch (const UnsupportedCostError& e) {
    outcome.fail(kConfigError, e.what());
  } catch (const IntegrationError& e) {
    outcome.fail(kNotConverged, e.what());
  } catch (const DivergenceError& e) {
    outcome.fail(kNotConverged, e.what());
  }
  return outcome.finish();
}

}  // namespace stratpatch::cli
