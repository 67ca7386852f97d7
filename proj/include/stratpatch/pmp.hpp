#pragma once

#include "stratpatch/costs.hpp"
#include "stratpatch/thresholds.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace stratpatch {

/// Costate trajectories on the state grid.  lambda_r and alpha are only
/// populated in replicative mode.  phi already includes the unicast
/// reception charge, phi_i - c_i p(1), so that every bang-bang decision
/// compares phi against h_i(1).
struct AdjointTrajectory {
  TimeGrid grid;
  Matrix lambda_s;
  Matrix lambda_i;
  Matrix lambda_r;
  Matrix phi;
  Matrix alpha;

  [[nodiscard]] bool replicative() const noexcept { return lambda_r.size() > 0; }
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a cost variant is outside the regime the solver supports.
class UnsupportedCostError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

AdjointTrajectory integrate_adjoint_nonreplicative(const NetworkModel& model,
                                                   const CostModel& cost,
                                                   const ControlTrajectory& control,
                                                   const StateTrajectory& states);

AdjointTrajectory integrate_adjoint_replicative(const NetworkModel& model, const CostModel& cost,
                                                const ControlTrajectory& control,
                                                const StateTrajectory& states);

AdjointTrajectory integrate_adjoint(PatchMode mode, const NetworkModel& model,
                                    const CostModel& cost, const ControlTrajectory& control,
                                    const StateTrajectory& states);

/// Switching signal phi_i(t_k) for every type and grid point.
Matrix compute_phi(PatchMode mode, const NetworkModel& model, const CostModel& cost,
                   const StateTrajectory& states, const AdjointTrajectory& adjoints);

/// argmin over x in [0,1] of dispatcher_mass * (h(x) - phi x).  Ties pick 0.
double minimize_hamiltonian_pointwise(double phi, const EffortShape& effort,
                                      double dispatcher_mass);

struct SweepConfig {
  int n_steps = 3500;
  int max_iterations = 500;
  double tolerance = 1e-5;
  double relaxation = 0.5;  // initial proximal step, as a fraction of max |phi|
  double initial_guess = 1.0;
  bool polish = true;  // single-threshold projection of bang-bang types

  void validate() const;
};

struct Convergence {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double final_relaxation = 0.0;
};

struct SolveResult {
  PatchMode mode = PatchMode::NonReplicative;
  ControlTrajectory control;
  StateTrajectory states;
  AdjointTrajectory adjoints;
  CostBreakdown cost;
  ThresholdReport thresholds;
  Convergence convergence;
  // Unicast structure results need pi_ij to depend only on the infected type j.
  bool structure_guaranteed = true;
};

/// Forward-backward sweep.  Each iteration integrates the states, then the
/// costates, and replaces the control by the pointwise minimizer of the
/// Hamiltonian plus (x - u)^2 / (2 s).  A step that raises J is retried with
/// s halved (down to 1/64 of the initial step); accepted steps double s.
/// The residual is the relative sup-norm change the initial step would make,
/// which vanishes exactly at controls satisfying the minimum principle.
/// Concave effort and reception shapes are iterated on their chords, which
/// agree with them on bang-bang controls; the returned cost uses the
/// original shapes.
/// On non-convergence the last (lowest cost) iterate is returned with
/// converged = false.
SolveResult forward_backward_sweep(const NetworkModel& model, const CostModel& cost,
                                   PatchMode mode, const SweepConfig& config = {});

/// Rebuilds the full result (states, costates, cost, thresholds) for a fixed control.
SolveResult evaluate_control(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                             const ControlTrajectory& control);

struct TypeStructure {
  int switch_count = 0;
  bool single_drop = true;        // bang-bang: at most one switch, 1 -> 0
  double max_rise = 0.0;          // largest positive forward difference of u
  bool jump_free = true;          // convex: no cell drop beyond the slope bound
  double min_lambda_i = 0.0;      // over [0, T - dt]
  double min_gap_is = 0.0;        // min of lambda_i - lambda_s
  double min_gap_ir = 0.0;        // replicative: min of lambda_i - lambda_r
  double max_phi_rise = 0.0;      // largest positive forward difference of phi
  double max_alpha = 0.0;         // replicative: max of alpha away from switch cells
};

struct StructureReport {
  std::vector<TypeStructure> types;
  bool guaranteed_by_theory = true;  // false for unicast with pi depending on the dispatcher
  std::vector<std::string> notes;

  [[nodiscard]] bool controls_ok() const;
  [[nodiscard]] bool lemmas_ok(double slack = 1e-8) const;
};

StructureReport verify_structure(const SolveResult& result, const CostModel& cost);

}  // namespace stratpatch
