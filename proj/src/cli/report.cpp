#include "stratpatch/cli.hpp"

#include <cstdio>
#include <ostream>

namespace stratpatch::cli {

namespace {

void header_family(std::ostream& out, const char* prefix, int m) {
  for (int j = 1; j <= m; ++j) out << ',' << prefix << '_' << j;
}

void row_family(std::ostream& out, const Matrix& values, int k) {
  for (Eigen::Index j = 0; j < values.rows(); ++j) out << ',' << format_number(values(j, k));
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) out += ';';
    out += format_number(values[k]);
  }
  return out;
}

}  // namespace

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

void write_trajectory_csv(std::ostream& out, const SolveResult& result) {
  const int m = result.control.num_types();
  const bool rep = result.adjoints.replicative();
  out << 't';
  header_family(out, "S", m);
  header_family(out, "I", m);
  header_family(out, "R", m);
  header_family(out, "u", m);
  header_family(out, "lamS", m);
  header_family(out, "lamI", m);
  if (rep) header_family(out, "lamR", m);
  header_family(out, "phi", m);
  out << '\n';
  const TimeGrid& grid = result.states.grid;
  for (int k = 0; k < grid.points(); ++k) {
    out << format_number(grid.time(k));
    row_family(out, result.states.s, k);
    row_family(out, result.states.i, k);
    row_family(out, result.states.r, k);
    row_family(out, result.control.u, k);
    row_family(out, result.adjoints.lambda_s, k);
    row_family(out, result.adjoints.lambda_i, k);
    if (rep) row_family(out, result.adjoints.lambda_r, k);
    row_family(out, result.adjoints.phi, k);
    out << '\n';
  }
}

void write_summary_csv(std::ostream& out, const SolveResult& result, const ThresholdReport& report) {
  out << "quantity,type,value\n";
  out << "mode,," << to_string(result.mode) << '\n';
  out << "J_total,," << format_number(result.cost.total) << '\n';
  out << "J_infection,," << format_number(result.cost.infection) << '\n';
  out << "J_benefit,," << format_number(result.cost.benefit) << '\n';
  out << "J_effort,," << format_number(result.cost.effort) << '\n';
  out << "converged,," << (result.convergence.converged ? 1 : 0) << '\n';
  out << "iterations,," << result.convergence.iterations << '\n';
  out << "residual,," << format_number(result.convergence.residual) << '\n';
  out << "structure_guaranteed,," << (result.structure_guaranteed ? 1 : 0) << '\n';
  for (std::size_t j = 0; j < report.types.size(); ++j) {
    const TypeThresholds& t = report.types[j];
    const std::size_t type = j + 1;
    out << "drop_off," << type << ',' << format_number(t.drop_off) << '\n';
    out << "plateau_end," << type << ',' << format_number(t.plateau_end) << '\n';
    out << "decay_end," << type << ',' << format_number(t.decay_end) << '\n';
    out << "switch_count," << type << ',' << t.switch_count << '\n';
    out << "distance_from_seed," << type << ',' << t.distance_from_seed << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << "policy,parameters,J,gap_vs_optimal\n";
  for (const PolicyRow& row : table.rows) {
    out << row.policy << ',' << join(row.parameters) << ',' << format_number(row.cost) << ','
        << format_number(row.gap_vs_optimal) << '\n';
  }
}

void write_linear_pattern_csv(std::ostream& out, const std::vector<LinearPatternRun>& runs) {
  out << "pi,x_coef,type,distance,drop_off,converged\n";
  for (const LinearPatternRun& run : runs) {
    for (std::size_t j = 0; j < run.report.types.size(); ++j) {
      const TypeThresholds& t = run.report.types[j];
      out << format_number(run.pi) << ',' << format_number(run.x_coef) << ',' << j + 1 << ','
          << t.distance_from_seed << ',' << format_number(t.drop_off) << ','
          << (run.converged ? 1 : 0) << '\n';
    }
  }
}

void write_star_pattern_csv(std::ostream& out, const std::vector<StarPatternRun>& runs) {
  out << "pi,peripherals,type,role,drop_off,converged\n";
  for (const StarPatternRun& run : runs) {
    for (std::size_t j = 0; j < run.report.types.size(); ++j) {
      const char* role = j == 0 ? "hub" : (j == 1 ? "seed" : "peripheral");
      out << format_number(run.pi) << ',' << run.peripherals << ',' << j + 1 << ',' << role << ','
          << format_number(run.report.types[j].drop_off) << ',' << (run.converged ? 1 : 0)
          << '\n';
    }
  }
}

void write_cost_comparison_csv(std::ostream& out, const std::vector<ComparisonTable>& tables) {
  out << "m,policy,J,gap_vs_optimal\n";
  for (const ComparisonTable& table : tables) {
    for (const PolicyRow& row : table.rows) {
      out << table.num_types << ',' << row.policy << ',' << format_number(row.cost) << ','
          << format_number(row.gap_vs_optimal) << '\n';
    }
  }
}

void write_mode_comparison_csv(std::ostream& out, const std::vector<ModeComparison>& rows) {
  out << "m,J_replicative,J_nonreplicative,advantage,converged\n";
  for (const ModeComparison& row : rows) {
    out << row.m << ',' << format_number(row.replicative) << ','
        << format_number(row.nonreplicative) << ',' << format_number(row.advantage()) << ','
        << (row.converged ? 1 : 0) << '\n';
  }
}

std::string to_string(Subcommand command) {
  switch (command) {
    case Subcommand::Solve:
      return "solve";
    case Subcommand::Compare:
      return "compare";
    case Subcommand::Figures:
      return "figures";
    case Subcommand::Oracle:
      return "oracle";
  }
  return "unknown";
}

}  // namespace stratpatch::cli
