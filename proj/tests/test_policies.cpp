#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace stratpatch;

namespace {

PolicySearch search_with(int n) {
  PolicySearch search;
  search.n_steps = n;
  search.surrogate_solver.n_steps = n;
  return search;
}

NetworkModel single_region() {
  Scenario s = three_region_scenario(1.0);
  s.topology.m = 1;
  return s.model();
}

NetworkModel symmetric_complete(int m, double x_coef) {
  NetworkModel model = build_topology({TopologyKind::Complete, m, 0.223, x_coef, 0}, {});
  model.i0.setConstant(0.1);
  model.s0 = Vector::Ones(m) - model.i0 - model.r0;
  return model;
}

}  // namespace

TEST_CASE("no infection cost means static level zero") {
  const NetworkModel model = three_region_scenario(1.0).model();
  const HeuristicResult best =
      static_policy(model, CostModel::type_a(0.0, 0.5), PatchMode::NonReplicative, search_with(500));
  CHECK(best.parameters.at(0) == 0.0);
  CHECK(best.cost == 0.0);
}

TEST_CASE("single type heuristics against the optimum") {
  const NetworkModel model = single_region();
  const CostModel cost = CostModel::type_a(1.0, 0.5);
  const PolicySearch search = search_with(3500);
  const SolveResult optimum = forward_backward_sweep(model, cost, PatchMode::NonReplicative);
  const HeuristicResult st = static_policy(model, cost, PatchMode::NonReplicative, search);
  const HeuristicResult sst = stratified_static_policy(model, cost, PatchMode::NonReplicative, search);
  const HeuristicResult sh = simplified_homogeneous_policy(model, cost, PatchMode::NonReplicative, search);
  CHECK(st.cost >= optimum.cost.total);
  CHECK(sst.cost == doctest::Approx(st.cost).epsilon(1e-9));
  CHECK(sst.parameters.at(0) == doctest::Approx(st.parameters.at(0)).epsilon(1e-3));
  CHECK(sh.cost == doctest::Approx(optimum.cost.total).epsilon(1e-12));
}

TEST_CASE("single type concave effort: spatially static is optimal") {
  const NetworkModel model = single_region();
  CostModel cost = CostModel::type_a(1.0, 0.5);
  cost.effort = {EffortShape::concave_power(0.5, 0.5)};
  const SolveResult optimum = forward_backward_sweep(model, cost, PatchMode::NonReplicative);
  const HeuristicResult sp = spatially_static_policy(model, cost, PatchMode::NonReplicative, search_with(3500));
  CHECK(std::abs(sp.cost - optimum.cost.total) <= 0.005 * optimum.cost.total);
}

TEST_CASE("threshold candidates include both endpoints") {
  const auto axis = threshold_indices(3500, 10);
  CHECK(axis.size() == 351);
  CHECK(axis.front() == 0);
  CHECK(axis.back() == 3500);
  const TimeGrid grid(35.0, 3500);
  CHECK(ControlTrajectory::thresholds(grid, {0}).u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(ControlTrajectory::thresholds(grid, {3500}).u.minCoeff() == 1.0);
}

TEST_CASE("oracle is exhaustive over its grid") {
  const NetworkModel model = single_region();
  const CostModel cost = CostModel::type_a(1.0, 0.5);
  const auto axis = threshold_indices(3500, 10);
  const HeuristicResult oracle = brute_force_threshold_oracle(model, cost, PatchMode::NonReplicative, 3500, {axis});
  const TimeGrid grid(35.0, 3500);
  for (const int k : axis) {
    const double j = realized_cost(model, cost, PatchMode::NonReplicative, ControlTrajectory::thresholds(grid, {k})).total;
    CHECK(oracle.cost <= j);
  }
  CHECK(oracle.kind == PolicyKind::BruteForceThreshold);
}

TEST_CASE("oracle refuses oversized grids") {
  const NetworkModel model = three_region_scenario(0.0).model();
  const auto axis = threshold_indices(3500, 1);
  CHECK_THROWS_AS(brute_force_threshold_oracle(model, CostModel::type_a(1.0, 0.5), PatchMode::NonReplicative,
                                               3500, {axis, axis, axis}),
                  SearchBudgetError);
}

TEST_CASE("refined oracle reaches cell resolution") {
  const NetworkModel model = single_region();
  const CostModel cost = CostModel::type_a(1.0, 0.5);
  const HeuristicResult exhaustive = brute_force_threshold_oracle(
      model, cost, PatchMode::NonReplicative, 3500, {threshold_indices(3500, 1)});
  const HeuristicResult refined = refined_threshold_oracle(model, cost, PatchMode::NonReplicative, 3500, 50);
  CHECK(refined.cost == exhaustive.cost);
  CHECK(refined.parameters == exhaustive.parameters);
}

TEST_CASE("surrogate averages rates and initial fractions") {
  std::mt19937_64 rng(61);
  const NetworkModel model = testing::random_model(rng, 3);
  const NetworkModel with = homogeneous_surrogate(model, true);
  const NetworkModel without = homogeneous_surrogate(model, false);
  double all = 0.0, off = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      all += model.beta(i, j);
      if (i != j) off += model.beta(i, j);
    }
  }
  CHECK(with.beta(0, 0) == doctest::Approx(all / 9.0));
  CHECK(without.beta(0, 0) == doctest::Approx(off / 6.0));
  CHECK(with.i0(0) == doctest::Approx(model.i0.sum() / 3.0));
  CHECK(with.s0(0) + with.i0(0) + with.r0(0) == doctest::Approx(1.0));
}

TEST_CASE("symmetric complete topology: equal stratified levels") {
  const NetworkModel model = symmetric_complete(3, 0.5);
  const HeuristicResult sst = stratified_static_policy(model, CostModel::type_a(1.0, 0.5),
                                                       PatchMode::NonReplicative, search_with(1000));
  for (const double level : sst.parameters) CHECK(level == doctest::Approx(sst.parameters[0]).epsilon(1e-3));
}

TEST_CASE("homogeneous policy is one of the spatially static controls") {
  const NetworkModel model = symmetric_complete(3, 1.0);
  const CostModel cost = CostModel::type_a(1.0, 0.5);
  const PolicySearch search = search_with(3500);
  const HeuristicResult sh = simplified_homogeneous_policy(model, cost, PatchMode::NonReplicative, search);
  const HeuristicResult sp = spatially_static_policy(model, cost, PatchMode::NonReplicative, search);
  CHECK(homogeneous_surrogate(model).beta(0, 0) == doctest::Approx(0.223));
  for (int j = 1; j < 3; ++j) CHECK(sh.control.u.row(j) == sh.control.u.row(0));
  CHECK(sh.cost >= sp.cost * (1.0 - 1e-12));
}

TEST_CASE("static family ordering on a linear chain") {
  const Scenario s = cost_comparison_scenario(3);
  const NetworkModel model = s.model();
  const PolicySearch search = search_with(1000);
  const HeuristicResult st = static_policy(model, s.cost, s.mode, search);
  const HeuristicResult sst = stratified_static_policy(model, s.cost, s.mode, search);
  CHECK(sst.cost <= st.cost);
  CHECK(to_string(PolicyKind::StratifiedStatic) == "stratified_static");
}
