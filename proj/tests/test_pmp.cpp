#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace stratpatch;

namespace {

SweepConfig fast_config(int n = 3500) {
  SweepConfig config;
  config.n_steps = n;
  return config;
}

}  // namespace

TEST_CASE("pointwise minimizer branches") {
  const EffortShape linear = EffortShape::linear(0.5);
  CHECK(minimize_hamiltonian_pointwise(0.7, linear, 0.2) == 1.0);
  CHECK(minimize_hamiltonian_pointwise(0.3, linear, 0.2) == 0.0);
  CHECK(minimize_hamiltonian_pointwise(0.5, linear, 0.2) == 0.0);
  CHECK(minimize_hamiltonian_pointwise(0.0, linear, 0.2) == 0.0);
  const EffortShape square = EffortShape::convex_power(2.0, 1.0);
  CHECK(minimize_hamiltonian_pointwise(1.0, square, 0.2) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(minimize_hamiltonian_pointwise(3.0, square, 0.2) == 1.0);
  CHECK(minimize_hamiltonian_pointwise(-1.0, square, 0.2) == 0.0);
  const EffortShape root = EffortShape::concave_power(0.5, 0.5);
  CHECK(minimize_hamiltonian_pointwise(0.6, root, 0.2) == 1.0);
  CHECK(minimize_hamiltonian_pointwise(0.4, root, 0.2) == 0.0);
}

TEST_CASE("phi of a single type matches the assembled formula") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const NetworkModel model = testing::single_type(0.3, 0.7, 0.4, 0.5, 0.3, 0.2, 1.0);
  const TimeGrid grid(1.0, 4);
  StateTrajectory x = testing::constant_states(grid, 0.5, 0.3, 0.2);
  AdjointTrajectory adj;
  adj.grid = grid;
  adj.lambda_s = Matrix(1, 5);
  adj.lambda_i = Matrix(1, 5);
  adj.lambda_r = Matrix(1, 5);
  for (int k = 0; k < 5; ++k) {
    x.s(0, k) = std::abs(unit(rng));
    x.i(0, k) = std::abs(unit(rng));
    adj.lambda_s(0, k) = unit(rng);
    adj.lambda_i(0, k) = unit(rng);
    adj.lambda_r(0, k) = unit(rng);
  }
  const CostModel cost = CostModel::type_a(1.0, 0.5);
  const Matrix nonrep = compute_phi(PatchMode::NonReplicative, model, cost, x, adj);
  const Matrix rep = compute_phi(PatchMode::Replicative, model, cost, x, adj);
  for (int k = 0; k < 5; ++k) {
    const double s = x.s(0, k), i = x.i(0, k);
    const double ls = adj.lambda_s(0, k), li = adj.lambda_i(0, k), lr = adj.lambda_r(0, k);
    CHECK(std::abs(nonrep(0, k) - 0.7 * (ls * s + 0.4 * li * i)) < 1e-15);
    CHECK(std::abs(rep(0, k) - 0.7 * ((ls - lr) * s + 0.4 * (li - lr) * i)) < 1e-15);
  }
  adj.lambda_s.setZero();
  adj.lambda_i.setZero();
  adj.lambda_r.setZero();
  CHECK(compute_phi(PatchMode::Replicative, model, cost, x, adj).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("homogeneous terminal problem has zero costates") {
  const NetworkModel model = testing::single_type(0.3, 0.7, 0.4, 0.8, 0.0, 0.2, 2.0);
  const TimeGrid grid(2.0, 200);
  const auto control = ControlTrajectory::constant(grid, 1, 0.0);
  const StateTrajectory x = integrate_forward(model, PatchMode::NonReplicative, control);
  const AdjointTrajectory adj =
      integrate_adjoint(PatchMode::NonReplicative, model, CostModel::type_a(0.0, 0.5), control, x);
  CHECK(adj.lambda_s.cwiseAbs().maxCoeff() == 0.0);
  CHECK(adj.lambda_i.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("costates are the sensitivity of the cost to the initial state") {
  std::mt19937_64 rng(53);
  for (const PatchMode mode : {PatchMode::NonReplicative, PatchMode::Replicative}) {
    const NetworkModel model = testing::random_model(rng, 3, 5.0);
    const TimeGrid grid(model.horizon, 2000);
    const ControlTrajectory control = testing::random_control(rng, grid, 3);
    const CostModel cost = CostModel::type_a(1.0, 0.5);
    const StateTrajectory x = integrate_forward(model, mode, control);
    const AdjointTrajectory adj = integrate_adjoint(mode, model, cost, control, x);
    CHECK(adj.lambda_s.col(grid.n_steps).cwiseAbs().maxCoeff() == 0.0);
    CHECK(adj.lambda_i.col(grid.n_steps).cwiseAbs().maxCoeff() == 0.0);
    if (mode == PatchMode::Replicative) CHECK(adj.lambda_r.col(grid.n_steps).cwiseAbs().maxCoeff() == 0.0);
    CHECK(adj.phi.col(grid.n_steps).cwiseAbs().maxCoeff() == 0.0);

    // Moving mass eps from S_j to I_j changes J by eps (lambda_I - lambda_S) at t = 0.
    const double eps = 1e-6;
    for (int j = 0; j < 3; ++j) {
      NetworkModel up = model, down = model;
      up.s0(j) -= eps;
      up.i0(j) += eps;
      down.s0(j) += eps;
      down.i0(j) -= eps;
      const double jp = evaluate_cost(up, cost, mode, control, integrate_forward(up, mode, control)).total;
      const double jm = evaluate_cost(down, cost, mode, control, integrate_forward(down, mode, control)).total;
      const double numeric = (jp - jm) / (2 * eps);
      const double adjoint = adj.lambda_i(j, 0) - adj.lambda_s(j, 0);
      CHECK(adjoint == doctest::Approx(numeric).epsilon(2e-3));
    }
  }
}

TEST_CASE("replicative phi approaches non-replicative phi when the pool barely grows") {
  NetworkModel model = testing::fig1_scenario(1.0).model();
  model.beta_bar *= 1e-4;
  const TimeGrid grid(model.horizon, 3500);
  std::mt19937_64 rng(57);
  const ControlTrajectory control = testing::random_control(rng, grid, 3);
  const CostModel cost = CostModel::type_a(1.0, 0.0);
  const auto phi = [&](PatchMode mode) {
    const StateTrajectory x = integrate_forward(model, mode, control);
    return integrate_adjoint(mode, model, cost, control, x).phi;
  };
  const Matrix a = phi(PatchMode::NonReplicative);
  const Matrix b = phi(PatchMode::Replicative);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-3 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("three-region optimum has one drop per type") {
  for (const double pi : {0.0, 1.0}) {
    for (const PatchMode mode : {PatchMode::NonReplicative, PatchMode::Replicative}) {
      const Scenario s = testing::fig1_scenario(pi);
      const SolveResult result = forward_backward_sweep(s.model(), s.cost, mode, fast_config());
      CAPTURE(pi);
      CAPTURE(to_string(mode));
      REQUIRE(result.convergence.converged);
      for (int j = 0; j < 3; ++j) CHECK(result.control.u(j, 0) == 1.0);
      const StructureReport report = verify_structure(result, s.cost);
      CHECK(report.controls_ok());
      CHECK(report.lemmas_ok());
      for (const auto& t : report.types) {
        CHECK(t.switch_count == 1);
        CHECK(t.min_lambda_i > 0.0);
        if (mode == PatchMode::Replicative) CHECK(t.max_alpha <= 1e-10);
      }
      // The last cell before T always carries lambda_I = dt * K_I.
      CHECK(result.adjoints.lambda_i(0, 3499) == doctest::Approx(0.01).epsilon(1e-3));
    }
  }
}

TEST_CASE("free infection means no patching") {
  const Scenario s = testing::fig1_scenario(1.0);
  const SolveResult result =
      forward_backward_sweep(s.model(), CostModel::type_a(0.0, 0.5), PatchMode::NonReplicative, fast_config(500));
  CHECK(result.control.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(result.cost.total == 0.0);
}

TEST_CASE("single type sweep matches the threshold oracle") {
  Scenario s = testing::fig1_scenario(1.0);
  s.topology.m = 1;
  const NetworkModel model = s.model();
  const SolveResult sweep = forward_backward_sweep(model, s.cost, PatchMode::NonReplicative, fast_config());
  const HeuristicResult oracle = brute_force_threshold_oracle(
      model, s.cost, PatchMode::NonReplicative, 3500, {threshold_indices(3500, 1)});
  CHECK(sweep.cost.total <= oracle.cost * 1.005);
  CHECK(std::abs(sweep.thresholds.types[0].drop_off - oracle.parameters[0]) <= 2 * 0.01 + 1e-9);
}

TEST_CASE("convex effort gives a plateau then a continuous decay") {
  Scenario s = testing::fig1_scenario(1.0);
  s.cost.effort = {EffortShape::convex_power(2.0, 0.2)};
  const SolveResult result = forward_backward_sweep(s.model(), s.cost, PatchMode::NonReplicative, fast_config());
  REQUIRE(result.convergence.converged);
  const StructureReport report = verify_structure(result, s.cost);
  CHECK(report.controls_ok());
  for (int j = 0; j < 3; ++j) {
    CHECK(report.types[j].max_rise <= 1e-6);
    CHECK(report.types[j].jump_free);
    const TypeThresholds& t = result.thresholds.types[j];
    CHECK(t.plateau_end < t.decay_end);
    CHECK(result.control.u(j, 0) == 1.0);
  }
}

TEST_CASE("concave effort switches at most once") {
  Scenario s = testing::fig1_scenario(0.0);
  s.cost.effort = {EffortShape::concave_power(0.5, 0.5)};
  const SolveResult result = forward_backward_sweep(s.model(), s.cost, PatchMode::Replicative, fast_config());
  REQUIRE(result.convergence.converged);
  for (const auto& t : verify_structure(result, s.cost).types) CHECK(t.switch_count <= 1);
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k <= 3500; ++k) CHECK((result.control.u(j, k) == 0.0 || result.control.u(j, k) == 1.0));
  }
}

TEST_CASE("solves are bitwise reproducible") {
  const Scenario s = linear_pattern_scenario(5, 0.2, 1.0);
  const SolveResult a = forward_backward_sweep(s.model(), s.cost, s.mode, fast_config());
  const SolveResult b = forward_backward_sweep(s.model(), s.cost, s.mode, fast_config());
  CHECK(a.control.u == b.control.u);
  CHECK(a.adjoints.phi == b.adjoints.phi);
  CHECK(a.cost.total == b.cost.total);
}

TEST_CASE("zero control has no switches") {
  const Scenario s = testing::fig1_scenario(0.0);
  const NetworkModel model = s.model();
  const SolveResult result = evaluate_control(model, s.cost, PatchMode::NonReplicative,
                                              ControlTrajectory::constant(TimeGrid(35.0, 3500), 3, 0.0));
  for (const auto& t : verify_structure(result, s.cost).types) CHECK(t.switch_count == 0);
  for (const auto& t : result.thresholds.types) CHECK(t.drop_off == 0.0);
}

TEST_CASE("unicast with dispatcher-dependent efficacy is flagged") {
  Scenario s = star_pattern_scenario(2, 1.0);
  NetworkModel model = s.model();
  model.pi(0, 1) = 0.3;
  const SolveResult result = forward_backward_sweep(model, s.cost, s.mode, fast_config(700));
  CHECK_FALSE(result.structure_guaranteed);
  const StructureReport report = verify_structure(result, s.cost);
  CHECK_FALSE(report.guaranteed_by_theory);
  CHECK_FALSE(report.notes.empty());
}

TEST_CASE("invalid sweep settings are rejected") {
  SweepConfig config;
  config.n_steps = 1;
  CHECK_THROWS(config.validate());
  config = {};
  config.tolerance = 0.0;
  CHECK_THROWS(config.validate());
}
