#include "stratpatch/costs.hpp"

#include <cmath>
#include <stdexcept>

namespace stratpatch {

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Linear:
      return "linear";
    case ShapeKind::ConcavePower:
      return "concave";
    case ShapeKind::ConvexPower:
      return "convex";
  }
  return "unknown";
}

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "linear") return ShapeKind::Linear;
  if (name == "concave") return ShapeKind::ConcavePower;
  if (name == "convex") return ShapeKind::ConvexPower;
  throw std::invalid_argument("unknown shape '" + name + "'");
}

EffortShape EffortShape::linear(double scale) { return {ShapeKind::Linear, scale, 1.0}; }

EffortShape EffortShape::concave_power(double exponent, double scale) {
  return {ShapeKind::ConcavePower, scale, exponent};
}

EffortShape EffortShape::convex_power(double exponent, double scale) {
  return {ShapeKind::ConvexPower, scale, exponent};
}

double EffortShape::value(double x) const {
  if (kind == ShapeKind::Linear) return scale * x;
  return x <= 0.0 ? 0.0 : scale * std::pow(x, exponent);
}

double EffortShape::derivative(double x) const {
  if (kind == ShapeKind::Linear) return scale;
  if (x <= 0.0) return exponent < 1.0 ? HUGE_VAL : (exponent == 1.0 ? scale : 0.0);
  return scale * exponent * std::pow(x, exponent - 1.0);
}

double EffortShape::second_derivative(double x) const {
  if (kind == ShapeKind::Linear) return 0.0;
  if (x <= 0.0) x = 1e-300;
  return scale * exponent * (exponent - 1.0) * std::pow(x, exponent - 2.0);
}

void EffortShape::validate(bool allow_zero) const {
  switch (kind) {
    case ShapeKind::Linear:
      if (!(scale > 0.0) && !(allow_zero && scale == 0.0)) {
        throw std::invalid_argument("linear shape needs a positive scale");
      }
      return;
    case ShapeKind::ConcavePower:
      if (!(exponent > 0.0 && exponent < 1.0)) {
        throw std::invalid_argument("concave power shape needs exponent in (0,1)");
      }
      break;
    case ShapeKind::ConvexPower:
      if (!(exponent > 1.0)) throw std::invalid_argument("convex power shape needs exponent > 1");
      break;
  }
  if (!(scale > 0.0)) throw std::invalid_argument("power shape needs a positive scale");
  const double sign = kind == ShapeKind::ConvexPower ? 1.0 : -1.0;
  for (int k = 1; k <= 16; ++k) {
    const double x = k / 16.0;
    if (!(sign * second_derivative(x) > 0.0) || !(derivative(x) > 0.0)) {
      throw std::invalid_argument("shape tag does not match its curvature");
    }
  }
}

CostModel CostModel::type_a(double k_i, double k_u) {
  CostModel cost;
  cost.infection_weight = k_i;
  cost.effort = {EffortShape::linear(k_u)};
  return cost;
}

CostModel CostModel::type_b(double k_i, double k_u) {
  CostModel cost;
  cost.infection_weight = k_i;
  cost.effort = {EffortShape::linear(0.0)};
  cost.variant = CostVariant::Unicast;
  cost.reception = EffortShape::linear(k_u);
  cost.reception_weights = ReceptionWeights::SelfOnly;
  return cost;
}

const EffortShape& CostModel::effort_for(int type) const {
  if (effort.size() == 1) return effort.front();
  return effort.at(static_cast<std::size_t>(type));
}

double CostModel::infection_rate(const Eigen::Ref<const Vector>& infected) const {
  if (infection_exponent == 1.0) return infection_weight * infected.sum();
  double total = 0.0;
  for (Eigen::Index j = 0; j < infected.size(); ++j) {
    total += std::pow(std::max(infected(j), 0.0), infection_exponent);
  }
  return infection_weight * total;
}

double CostModel::infection_marginal(double infected) const {
  if (infection_exponent == 1.0) return infection_weight;
  return infection_weight * infection_exponent *
         std::pow(std::max(infected, 0.0), infection_exponent - 1.0);
}

Matrix CostModel::reception_matrix(const NetworkModel& model) const {
  const int m = model.num_types();
  if (variant == CostVariant::Broadcast) return Matrix::Zero(m, m);
  if (reception_weights == ReceptionWeights::SelfOnly) return Matrix::Identity(m, m);
  return model.beta_bar;
}

void CostModel::validate(int num_types) const {
  if (!(infection_weight >= 0.0)) throw std::invalid_argument("K_I must be non-negative");
  if (!(infection_exponent >= 1.0)) throw std::invalid_argument("infection exponent must be >= 1");
  if (!(benefit_weight >= 0.0)) throw std::invalid_argument("benefit weight must be non-negative");
  if (effort.empty() || (effort.size() != 1 && static_cast<int>(effort.size()) != num_types)) {
    throw std::invalid_argument("effort shapes must be one shared shape or one per type");
  }
  const bool unicast = variant == CostVariant::Unicast;
  for (const auto& h : effort) h.validate(/*allow_zero=*/unicast);
  if (unicast) {
    if (reception.kind == ShapeKind::ConvexPower) {
      throw std::invalid_argument("reception shape must be linear or concave");
    }
    reception.validate();
  }
}

namespace {

CostBreakdown integrate(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                        const ControlTrajectory& control, const StateTrajectory& states,
                        const Matrix& reception) {
  if (!(control.grid == states.grid)) throw std::invalid_argument("control and state grids differ");
  if (states.s.rows() != model.num_types() || control.u.rows() != model.num_types()) {
    throw std::invalid_argument("trajectory type count differs from model");
  }
  const int m = model.num_types();
  const int n = states.grid.n_steps;
  const double dt = states.grid.dt();
  const bool replicative = mode == PatchMode::Replicative;
  const bool unicast = cost.variant == CostVariant::Unicast;

  const auto mass = [&](int j, int k) { return replicative ? states.r(j, k) : model.r0(j); };
  const auto load = [&](int j, int k) {
    double c = 0.0;
    for (int l = 0; l < m; ++l) c += reception(j, l) * (states.s(l, k) + states.i(l, k));
    return c;
  };

  CostBreakdown out;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 * dt : dt;
    out.infection += w * cost.infection_rate(states.i.col(k));
    if (cost.benefit_weight != 0.0) out.benefit -= w * cost.benefit_weight * states.r.col(k).sum();
  }
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < m; ++j) {
      const double x = control.u(j, k);
      if (x == 0.0) continue;
      const double dispatchers = 0.5 * (mass(j, k) + mass(j, k + 1));
      out.effort += dt * dispatchers * cost.effort_for(j).value(x);
      if (unicast) {
        const double charged = 0.5 * (mass(j, k) * load(j, k) + mass(j, k + 1) * load(j, k + 1));
        out.effort += dt * charged * cost.reception.value(x);
      }
    }
  }
  out.total = out.infection + out.benefit + out.effort;
  return out;
}

}  // namespace

CostBreakdown evaluate_cost(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                            const ControlTrajectory& control, const StateTrajectory& states) {
  return integrate(model, cost, mode, control, states, cost.reception_matrix(model));
}

CostBreakdown type_b_cost(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                          const ControlTrajectory& control, const StateTrajectory& states) {
  if (cost.variant != CostVariant::Unicast || cost.reception.kind != ShapeKind::Linear) {
    throw std::invalid_argument("type-B cost needs a unicast variant with linear reception");
  }
  const CostModel preset = CostModel::type_b(cost.infection_weight, cost.reception.scale);
  return evaluate_cost(model, preset, mode, control, states);
}

}  // namespace stratpatch
