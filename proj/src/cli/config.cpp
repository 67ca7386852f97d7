#include "stratpatch/cli.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace stratpatch::cli {

namespace {

std::string located(const std::string& path, const std::string& message, int line) {
  std::string out = path.empty() ? message : path + ": " + message;
  if (line > 0) out = "line " + std::to_string(line) + ": " + out;
  return out;
}

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

/// One mapping of the document with strict key checking.
class Section {
 public:
  Section(const YAML::Node& node, std::string name, std::set<std::string> allowed)
      : node_(node), name_(std::move(name)) {
    if (!node_ || node_.IsNull()) return;
    if (!node_.IsMap()) throw ConfigError(name_, "expected a mapping", line_of(node_));
    for (const auto& entry : node_) {
      const auto key = entry.first.as<std::string>();
      if (allowed.count(key) == 0) {
        throw ConfigError(path(key), "unknown key", line_of(entry.first));
      }
    }
  }

  [[nodiscard]] bool has(const std::string& key) const {
    return node_ && node_.IsMap() && node_[key].IsDefined() && !node_[key].IsNull();
  }

  [[nodiscard]] std::string path(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  [[nodiscard]] YAML::Node child(const std::string& key) const {
    return has(key) ? node_[key] : YAML::Node();
  }

  [[nodiscard]] int line(const std::string& key) const {
    return has(key) ? line_of(node_[key]) : (node_ ? line_of(node_) : 0);
  }

  [[nodiscard]] double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const YAML::Node value = node_[key];
    if (!value.IsScalar()) throw ConfigError(path(key), "expected a number", line(key));
    const std::string text = value.Scalar();
    char* end = nullptr;
    const double parsed = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
      throw ConfigError(path(key), "expected a number, got '" + text + "'", line(key));
    }
    return parsed;
  }

  [[nodiscard]] int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const YAML::Node value = node_[key];
    if (!value.IsScalar()) throw ConfigError(path(key), "expected an integer", line(key));
    const std::string text = value.Scalar();
    char* end = nullptr;
    const long parsed = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size()) {
      throw ConfigError(path(key), "expected an integer, got '" + text + "'", line(key));
    }
    return static_cast<int>(parsed);
  }

  [[nodiscard]] bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    try {
      return node_[key].as<bool>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path(key), "expected true or false", line(key));
    }
  }

  [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!node_[key].IsScalar()) throw ConfigError(path(key), "expected a string", line(key));
    return node_[key].Scalar();
  }

  void require(bool condition, const std::string& key, const std::string& message) const {
    if (!condition) throw ConfigError(path(key), message, line(key));
  }

 private:
  YAML::Node node_;
  std::string name_;
};

ShapeKind parse_shape(const Section& section, const std::string& key, ShapeKind fallback) {
  if (!section.has(key)) return fallback;
  try {
    return parse_shape_kind(section.text(key, ""));
  } catch (const std::invalid_argument&) {
    throw ConfigError(section.path(key), "expected linear, concave or convex", section.line(key));
  }
}

void check_shape(const Section& section, ShapeKind kind, double exponent) {
  switch (kind) {
    case ShapeKind::Linear:
      section.require(exponent == 1.0, "exponent", "linear shapes take exponent 1");
      break;
    case ShapeKind::ConcavePower:
      section.require(exponent > 0.0 && exponent < 1.0, "exponent",
                      "concave shapes need an exponent in (0,1)");
      break;
    case ShapeKind::ConvexPower:
      section.require(exponent > 1.0, "exponent", "convex shapes need an exponent above 1");
      break;
  }
}

/// Shortest decimal form that reads back to the same double.
std::string exact(double value) {
  char buffer[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

}  // namespace

ConfigError::ConfigError(std::string path, const std::string& message, int line)
    : std::runtime_error(located(path, message, line)), path_(std::move(path)), line_(line) {}

std::string to_string(CostPreset preset) {
  switch (preset) {
    case CostPreset::Broadcast:
      return "broadcast";
    case CostPreset::Unicast:
      return "unicast";
    case CostPreset::TypeB:
      return "type-b";
  }
  return "unknown";
}

NetworkModel ScenarioConfig::model() const { return build_topology(topology, epidemic); }

CostModel ScenarioConfig::cost_model() const {
  if (cost.variant == CostPreset::TypeB) {
    CostModel out = CostModel::type_b(cost.k_i, cost.k_u);
    out.benefit_weight = cost.benefit;
    return out;
  }
  CostModel out;
  out.infection_weight = cost.k_i;
  out.benefit_weight = cost.benefit;
  const bool unicast = cost.variant == CostPreset::Unicast;
  const double scale = cost.effort_scale.value_or(unicast ? 0.0 : cost.k_u);
  out.effort = {EffortShape{cost.effort_shape, scale, cost.effort_exponent}};
  if (unicast) {
    out.variant = CostVariant::Unicast;
    out.reception = EffortShape{cost.reception_shape, cost.k_u, cost.reception_exponent};
  }
  return out;
}

Scenario ScenarioConfig::scenario() const {
  Scenario out;
  out.id = to_string(topology.kind) + "_m" + std::to_string(topology.m);
  out.topology = topology;
  out.seed = epidemic;
  out.cost = cost_model();
  out.mode = mode;
  return out;
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  const auto& ta = a.topology;
  const auto& tb = b.topology;
  const auto& ea = a.epidemic;
  const auto& eb = b.epidemic;
  const auto& sa = a.solver;
  const auto& sb = b.solver;
  return a.schema == b.schema && ta.kind == tb.kind && ta.m == tb.m &&
         ta.intra_rate == tb.intra_rate && ta.cross_coef == tb.cross_coef && ta.hub == tb.hub &&
         ea.r0_frac == eb.r0_frac && ea.infected_seed == eb.infected_seed &&
         ea.i0_seed == eb.i0_seed && ea.pi_scalar == eb.pi_scalar && ea.horizon == eb.horizon &&
         a.cost == b.cost && a.mode == b.mode && sa.n_steps == sb.n_steps &&
         sa.max_iterations == sb.max_iterations && sa.tolerance == sb.tolerance &&
         sa.relaxation == sb.relaxation && sa.initial_guess == sb.initial_guess &&
         sa.polish == sb.polish && a.outputs == b.outputs;
}

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.msg, e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("topology", "section is required");
  const Section top(root, "",
                    {"schema", "topology", "epidemic", "cost", "mode", "solver", "outputs"});

  ScenarioConfig config;
  config.schema = top.integer("schema", kSchemaVersion);
  top.require(config.schema == kSchemaVersion, "schema",
              "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");

  if (!top.has("topology")) throw ConfigError("topology", "section is required");
  const Section topology(top.child("topology"), "topology", {"kind", "m", "beta", "x_coef", "hub"});
  if (!topology.has("kind")) throw ConfigError("topology.kind", "is required", top.line("topology"));
  if (!topology.has("m")) throw ConfigError("topology.m", "is required", top.line("topology"));
  try {
    config.topology.kind = parse_topology_kind(topology.text("kind", ""));
  } catch (const std::invalid_argument&) {
    throw ConfigError("topology.kind", "expected linear, star or complete", topology.line("kind"));
  }
  config.topology.m = topology.integer("m", 0);
  topology.require(config.topology.m >= 1, "m", "must be at least 1");
  config.topology.intra_rate = topology.number("beta", config.topology.intra_rate);
  topology.require(config.topology.intra_rate > 0.0, "beta", "must be positive");
  config.topology.cross_coef = topology.number("x_coef", config.topology.cross_coef);
  topology.require(config.topology.cross_coef >= 0.0, "x_coef", "must be non-negative");
  config.topology.hub = topology.integer("hub", config.topology.hub + 1) - 1;
  topology.require(config.topology.hub >= 0 && config.topology.hub < config.topology.m, "hub",
                   "must index a type in [1, m]");

  const Section epidemic(top.child("epidemic"), "epidemic", {"r0", "seed", "i0", "pi", "horizon"});
  auto& e = config.epidemic;
  e.r0_frac = epidemic.number("r0", e.r0_frac);
  epidemic.require(e.r0_frac >= 0.0 && e.r0_frac < 1.0, "r0", "must lie in [0,1)");
  e.infected_seed = epidemic.integer("seed", e.infected_seed + 1) - 1;
  epidemic.require(e.infected_seed >= 0 && e.infected_seed < config.topology.m, "seed",
                   "must index a type in [1, m]");
  e.i0_seed = epidemic.number("i0", e.i0_seed);
  epidemic.require(e.i0_seed > 0.0 && e.i0_seed <= 1.0, "i0", "must lie in (0,1]");
  epidemic.require(e.i0_seed + e.r0_frac <= 1.0, "i0", "i0 + r0 must not exceed 1");
  e.pi_scalar = epidemic.number("pi", e.pi_scalar);
  epidemic.require(e.pi_scalar >= 0.0 && e.pi_scalar <= 1.0, "pi", "must lie in [0,1]");
  e.horizon = epidemic.number("horizon", e.horizon);
  epidemic.require(e.horizon > 0.0, "horizon", "must be positive");

  const Section cost(top.child("cost"), "cost",
                     {"variant", "k_i", "k_u", "effort", "reception", "benefit"});
  auto& c = config.cost;
  const std::string variant = cost.text("variant", "broadcast");
  if (variant == "broadcast" || variant == "type-a") {
    c.variant = CostPreset::Broadcast;
  } else if (variant == "unicast") {
    c.variant = CostPreset::Unicast;
  } else if (variant == "type-b") {
    c.variant = CostPreset::TypeB;
  } else {
    throw ConfigError("cost.variant", "expected broadcast, unicast or type-b", cost.line("variant"));
  }
  c.k_i = cost.number("k_i", c.k_i);
  cost.require(c.k_i >= 0.0, "k_i", "must be non-negative");
  c.k_u = cost.number("k_u", c.k_u);
  cost.require(c.k_u >= 0.0, "k_u", "must be non-negative");
  c.benefit = cost.number("benefit", c.benefit);
  cost.require(c.benefit >= 0.0, "benefit", "must be non-negative");

  const Section effort(cost.child("effort"), "cost.effort", {"shape", "exponent", "scale"});
  c.effort_shape = parse_shape(effort, "shape", c.effort_shape);
  c.effort_exponent = effort.number("exponent", c.effort_shape == ShapeKind::Linear
                                                     ? 1.0
                                                     : (c.effort_shape == ShapeKind::ConvexPower ? 2.0 : 0.5));
  check_shape(effort, c.effort_shape, c.effort_exponent);
  if (effort.has("scale")) {
    c.effort_scale = effort.number("scale", 0.0);
    effort.require(*c.effort_scale >= 0.0, "scale", "must be non-negative");
  }
  if (c.variant == CostPreset::Broadcast) {
    const double scale = c.effort_scale.value_or(c.k_u);
    effort.require(scale > 0.0, "scale", "broadcast effort needs a positive scale (k_u)");
  }

  const Section reception(cost.child("reception"), "cost.reception", {"shape", "exponent"});
  c.reception_shape = parse_shape(reception, "shape", c.reception_shape);
  reception.require(c.reception_shape != ShapeKind::ConvexPower, "shape",
                    "reception must be linear or concave");
  c.reception_exponent =
      reception.number("exponent", c.reception_shape == ShapeKind::Linear ? 1.0 : 0.5);
  check_shape(reception, c.reception_shape, c.reception_exponent);
  if (c.variant == CostPreset::Unicast && c.effort_shape == ShapeKind::ConvexPower) {
    reception.require(c.reception_shape == ShapeKind::Linear, "shape",
                      "a convex effort with unicast cost needs a linear reception shape");
  }

  if (top.has("mode")) {
    try {
      config.mode = parse_patch_mode(top.text("mode", ""));
    } catch (const std::invalid_argument&) {
      throw ConfigError("mode", "expected nonrep or rep", top.line("mode"));
    }
  }

  const Section solver(top.child("solver"), "solver",
                       {"steps", "tol", "max_iter", "relaxation", "initial", "polish"});
  auto& s = config.solver;
  s.n_steps = solver.integer("steps", s.n_steps);
  solver.require(s.n_steps >= 2, "steps", "must be at least 2");
  s.tolerance = solver.number("tol", s.tolerance);
  solver.require(s.tolerance > 0.0, "tol", "must be positive");
  s.max_iterations = solver.integer("max_iter", s.max_iterations);
  solver.require(s.max_iterations >= 1, "max_iter", "must be at least 1");
  s.relaxation = solver.number("relaxation", s.relaxation);
  solver.require(s.relaxation > 0.0 && s.relaxation <= 1.0, "relaxation", "must lie in (0,1]");
  s.initial_guess = solver.number("initial", s.initial_guess);
  solver.require(s.initial_guess >= 0.0 && s.initial_guess <= 1.0, "initial", "must lie in [0,1]");
  s.polish = solver.boolean("polish", s.polish);

  const Section outputs(top.child("outputs"), "outputs", {"trajectory", "summary", "manifest"});
  config.outputs.trajectory = outputs.boolean("trajectory", config.outputs.trajectory);
  config.outputs.summary = outputs.boolean("summary", config.outputs.summary);
  config.outputs.manifest = outputs.boolean("manifest", config.outputs.manifest);

  try {
    require_valid(config.model());
  } catch (const ModelError& err) {
    throw ConfigError("epidemic", err.what());
  }
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string emit_config(const ScenarioConfig& config) {
  const auto flag = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream out;
  const auto& t = config.topology;
  const auto& e = config.epidemic;
  const auto& c = config.cost;
  const auto& s = config.solver;
  out << "schema: " << config.schema << "\n"
      << "topology:\n"
      << "  kind: " << to_string(t.kind) << "\n"
      << "  m: " << t.m << "\n"
      << "  beta: " << exact(t.intra_rate) << "\n"
      << "  x_coef: " << exact(t.cross_coef) << "\n"
      << "  hub: " << t.hub + 1 << "\n"
      << "epidemic:\n"
      << "  r0: " << exact(e.r0_frac) << "\n"
      << "  seed: " << e.infected_seed + 1 << "\n"
      << "  i0: " << exact(e.i0_seed) << "\n"
      << "  pi: " << exact(e.pi_scalar) << "\n"
      << "  horizon: " << exact(e.horizon) << "\n"
      << "cost:\n"
      << "  variant: " << to_string(c.variant) << "\n"
      << "  k_i: " << exact(c.k_i) << "\n"
      << "  k_u: " << exact(c.k_u) << "\n"
      << "  effort:\n"
      << "    shape: " << to_string(c.effort_shape) << "\n"
      << "    exponent: " << exact(c.effort_exponent) << "\n";
  if (c.effort_scale) out << "    scale: " << exact(*c.effort_scale) << "\n";
  out << "  reception:\n"
      << "    shape: " << to_string(c.reception_shape) << "\n"
      << "    exponent: " << exact(c.reception_exponent) << "\n"
      << "  benefit: " << exact(c.benefit) << "\n"
      << "mode: " << to_string(config.mode) << "\n"
      << "solver:\n"
      << "  steps: " << s.n_steps << "\n"
      << "  tol: " << exact(s.tolerance) << "\n"
      << "  max_iter: " << s.max_iterations << "\n"
      << "  relaxation: " << exact(s.relaxation) << "\n"
      << "  initial: " << exact(s.initial_guess) << "\n"
      << "  polish: " << flag(s.polish) << "\n"
      << "outputs:\n"
      << "  trajectory: " << flag(config.outputs.trajectory) << "\n"
      << "  summary: " << flag(config.outputs.summary) << "\n"
      << "  manifest: " << flag(config.outputs.manifest) << "\n";
  return out.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace stratpatch::cli
