#pragma once

#include "stratpatch/model.hpp"

#include <stdexcept>
#include <string>

namespace stratpatch {

enum class PatchMode { NonReplicative, Replicative };

std::string to_string(PatchMode mode);
PatchMode parse_patch_mode(const std::string& name);

/// Uniform discretization of [0, T] into n_steps cells.
struct TimeGrid {
  double horizon = 35.0;
  int n_steps = 3500;

  TimeGrid() = default;
  TimeGrid(double horizon_, int n_steps_);

  [[nodiscard]] double dt() const noexcept { return horizon / n_steps; }
  [[nodiscard]] double time(int k) const noexcept { return horizon * k / n_steps; }
  [[nodiscard]] int points() const noexcept { return n_steps + 1; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Per-type patching intensities on a grid.  Column k holds the control
/// applied on the cell [t_k, t_{k+1}); the last column is the value at T.
struct ControlTrajectory {
  TimeGrid grid;
  Matrix u;  // M x (N+1)

  static ControlTrajectory constant(const TimeGrid& grid, int num_types, double level);
  /// Per-type bang-bang control: 1 on cells before threshold index k_i, 0 after.
  static ControlTrajectory thresholds(const TimeGrid& grid, const std::vector<int>& switch_index);

  [[nodiscard]] int num_types() const noexcept { return static_cast<int>(u.rows()); }
};

/// Per-type compartment fractions at one instant (or their derivatives).
struct Compartments {
  Vector s;
  Vector i;
  Vector r;
};

struct StateTrajectory {
  TimeGrid grid;
  Matrix s;  // M x (N+1)
  Matrix i;
  Matrix r;

  [[nodiscard]] Compartments at(int k) const;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, int step, int type);
  [[nodiscard]] int step() const noexcept { return step_; }
  [[nodiscard]] int type() const noexcept { return type_; }

 private:
  int step_;
  int type_;
};

/// Vector field of the non-replicative system; dispatcher mass fixed at r0.
Compartments rhs_nonreplicative(const NetworkModel& model, const Compartments& state,
                                const Vector& u);

/// Vector field of the replicative system; dispatcher mass is the current R.
Compartments rhs_replicative(const NetworkModel& model, const Compartments& state,
                             const Vector& u);

Compartments rhs(PatchMode mode, const NetworkModel& model, const Compartments& state,
                 const Vector& u);

/// Classical RK4 on the control's grid with the control frozen per cell.
/// Throws IntegrationError when normalization drifts by more than 1e-6 or a
/// compartment drops below -1e-9.
StateTrajectory integrate_forward(const NetworkModel& model, PatchMode mode,
                                  const ControlTrajectory& control);

/// State inside cell k at fraction theta in [0,1], by cubic Hermite
/// interpolation using the cell's own vector field at both ends.
Compartments interpolate_state(const NetworkModel& model, PatchMode mode,
                               const StateTrajectory& states, const ControlTrajectory& control,
                               int k, double theta);

/// Replicative control that reproduces the non-replicative trajectory of
/// `control`: per cell, R_i u'_i matches R_i^0 u_i on average.
ControlTrajectory emulate_with_replicative(const NetworkModel& model,
                                          const ControlTrajectory& control,
                                          const StateTrajectory& nonrep_states);

}  // namespace stratpatch
