#pragma once

#include "stratpatch/dynamics.hpp"

#include <string>
#include <vector>

namespace stratpatch {

enum class ShapeKind { Linear, ConcavePower, ConvexPower };

std::string to_string(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& name);

/// Scalar effort or reception shape on [0,1]: scale * x (Linear) or
/// scale * x^exponent (power families).  All members satisfy g(0) = 0.
struct EffortShape {
  ShapeKind kind = ShapeKind::Linear;
  double scale = 0.5;
  double exponent = 1.0;

  static EffortShape linear(double scale);
  static EffortShape concave_power(double exponent, double scale);
  static EffortShape convex_power(double exponent, double scale);

  [[nodiscard]] double value(double x) const;
  [[nodiscard]] double derivative(double x) const;
  [[nodiscard]] double second_derivative(double x) const;
  /// Linear or concave: the Hamiltonian minimum sits at an endpoint.
  [[nodiscard]] bool bang_bang() const noexcept { return kind != ShapeKind::ConvexPower; }
  /// Throws std::invalid_argument when the tag contradicts the parameters.
  void validate(bool allow_zero = false) const;
};

enum class CostVariant { Broadcast, Unicast };

/// Which unpatched neighbours a unicast dispatcher is charged for:
/// every type weighted by beta_bar (general form) or only its own type with
/// unit weight (the benchmark's simplified form).
enum class ReceptionWeights { ContactRates, SelfOnly };

/// Running cost  f(I) - L(R) + sum_i D_i h_i(u_i)  [+ sum_i D_i c_i p(u_i)]
/// with D_i the dispatcher mass and c_i = sum_j W_ij (S_j + I_j).
struct CostModel {
  double infection_weight = 1.0;    // K_I
  double infection_exponent = 1.0;  // f(I) = K_I sum_i I_i^a
  double benefit_weight = 0.0;      // L(R) = w sum_i R_i
  std::vector<EffortShape> effort{EffortShape::linear(0.5)};  // one shared or one per type
  CostVariant variant = CostVariant::Broadcast;
  EffortShape reception = EffortShape::linear(0.0);
  ReceptionWeights reception_weights = ReceptionWeights::ContactRates;

  /// Integrand f = K_I sum I, h = K_u x, broadcast, no benefit.
  static CostModel type_a(double k_i, double k_u);
  /// Integrand K_I sum I + K_u sum D_i u_i (S_i + I_i).
  static CostModel type_b(double k_i, double k_u);

  [[nodiscard]] const EffortShape& effort_for(int type) const;
  [[nodiscard]] double infection_rate(const Eigen::Ref<const Vector>& infected) const;
  [[nodiscard]] double infection_marginal(double infected) const;
  [[nodiscard]] Matrix reception_matrix(const NetworkModel& model) const;
  /// Throws std::invalid_argument if a shape or weight violates its contract.
  void validate(int num_types) const;
};

struct CostBreakdown {
  double total = 0.0;
  double infection = 0.0;  // integral of f(I)
  double benefit = 0.0;    // integral of -L(R)
  double effort = 0.0;     // broadcast plus unicast charges
};

/// Integrates the running cost over the shared grid.  State-only terms use
/// the composite trapezoid rule on grid values; control terms use the
/// trapezoid rule within each cell with that cell's control held fixed.
CostBreakdown evaluate_cost(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                            const ControlTrajectory& control, const StateTrajectory& states);

/// Evaluates the simplified unicast benchmark integrand
///   K_I sum_i I_i + K_u sum_i D_i u_i (S_i + I_i)
/// taking K_I from `cost` and K_u from its linear reception shape.
CostBreakdown type_b_cost(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                          const ControlTrajectory& control, const StateTrajectory& states);

}  // namespace stratpatch
