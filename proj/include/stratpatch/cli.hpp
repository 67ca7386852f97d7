#pragma once

#include "stratpatch/analysis.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stratpatch::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kNotConverged = 3,
  kInvariantBreach = 4,
};

/// Configuration problem tied to a `section.key` path and, when known, the
/// 1-based source line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message, int line = 0);
  [[nodiscard]] const std::string& path() const noexcept { return path_; }
  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  std::string path_;
  int line_;
};

enum class CostPreset { Broadcast, Unicast, TypeB };

std::string to_string(CostPreset preset);

struct CostConfig {
  CostPreset variant = CostPreset::Broadcast;
  double k_i = 1.0;
  double k_u = 0.5;
  ShapeKind effort_shape = ShapeKind::Linear;
  double effort_exponent = 1.0;
  std::optional<double> effort_scale;  // defaults to k_u (broadcast) or 0 (unicast)
  ShapeKind reception_shape = ShapeKind::Linear;
  double reception_exponent = 1.0;
  double benefit = 0.0;

  friend bool operator==(const CostConfig&, const CostConfig&) = default;
};

struct OutputConfig {
  bool trajectory = true;
  bool summary = true;
  bool manifest = true;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ScenarioConfig {
  int schema = kSchemaVersion;
  Topology topology;
  SeedSpec epidemic;
  CostConfig cost;
  PatchMode mode = PatchMode::NonReplicative;
  SweepConfig solver;
  OutputConfig outputs;

  [[nodiscard]] NetworkModel model() const;
  [[nodiscard]] CostModel cost_model() const;
  [[nodiscard]] Scenario scenario() const;

  friend bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);
};

/// Parses a YAML scenario document.  Every field except `topology.kind` and
/// `topology.m` has a default.  Throws ConfigError.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical YAML form; parse_config(emit_config(c)) == c.
std::string emit_config(const ScenarioConfig& config);

/// 64-bit FNV-1a digest.
std::uint64_t fnv1a(const std::string& bytes);

// CSV emission: 12 significant digits, '.' decimal point, LF line endings.
std::string format_number(double value);
void write_trajectory_csv(std::ostream& out, const SolveResult& result);
void write_summary_csv(std::ostream& out, const SolveResult& result, const ThresholdReport& report);
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
void write_linear_pattern_csv(std::ostream& out, const std::vector<LinearPatternRun>& runs);
void write_star_pattern_csv(std::ostream& out, const std::vector<StarPatternRun>& runs);
void write_cost_comparison_csv(std::ostream& out, const std::vector<ComparisonTable>& tables);
void write_mode_comparison_csv(std::ostream& out, const std::vector<ModeComparison>& rows);

enum class Subcommand { Solve, Compare, Figures, Oracle };

std::string to_string(Subcommand command);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool quiet = false;
};

/// Executes a subcommand, writing its artifacts under `out_dir`.  Returns an
/// ExitCode; failures also leave `diagnostics.txt` in `out_dir`.
int run(Subcommand command, const ScenarioConfig& config, const RunOptions& options,
        std::ostream& log);

}  // namespace stratpatch::cli
