#include "stratpatch/analysis.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace stratpatch;

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Optimal dynamic patching of stratified SIR networks";

  py::register_exception<ModelError>(mod, "ModelError", PyExc_ValueError);
  py::register_exception<SearchBudgetError>(mod, "SearchBudgetError", PyExc_ValueError);
  py::register_exception<UnsupportedCostError>(mod, "UnsupportedCostError", PyExc_ValueError);
  py::register_exception<DivergenceError>(mod, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<IntegrationError>(mod, "IntegrationError", PyExc_RuntimeError);

  py::enum_<TopologyKind>(mod, "TopologyKind")
      .value("LINEAR", TopologyKind::Linear)
      .value("STAR", TopologyKind::Star)
      .value("COMPLETE", TopologyKind::Complete);

  py::enum_<PatchMode>(mod, "PatchMode")
      .value("NONREPLICATIVE", PatchMode::NonReplicative)
      .value("REPLICATIVE", PatchMode::Replicative);

  py::enum_<ShapeKind>(mod, "ShapeKind")
      .value("LINEAR", ShapeKind::Linear)
      .value("CONCAVE_POWER", ShapeKind::ConcavePower)
      .value("CONVEX_POWER", ShapeKind::ConvexPower);

  py::enum_<CostVariant>(mod, "CostVariant")
      .value("BROADCAST", CostVariant::Broadcast)
      .value("UNICAST", CostVariant::Unicast);

  py::enum_<ReceptionWeights>(mod, "ReceptionWeights")
      .value("CONTACT_RATES", ReceptionWeights::ContactRates)
      .value("SELF_ONLY", ReceptionWeights::SelfOnly);

  py::enum_<PolicyKind>(mod, "PolicyKind")
      .value("STATIC", PolicyKind::Static)
      .value("STRATIFIED_STATIC", PolicyKind::StratifiedStatic)
      .value("SPATIALLY_STATIC", PolicyKind::SpatiallyStatic)
      .value("SIMPLIFIED_HOMOGENEOUS", PolicyKind::SimplifiedHomogeneous)
      .value("BRUTE_FORCE_THRESHOLD", PolicyKind::BruteForceThreshold);

  py::class_<Topology>(mod, "Topology")
      .def(py::init([](TopologyKind kind, int m, double intra_rate, double cross_coef, int hub) {
             return Topology{kind, m, intra_rate, cross_coef, hub};
           }),
           py::arg("kind") = TopologyKind::Linear, py::arg("m") = 1,
           py::arg("intra_rate") = 0.223, py::arg("cross_coef") = 0.1, py::arg("hub") = 0)
      .def_readwrite("kind", &Topology::kind)
      .def_readwrite("m", &Topology::m)
      .def_readwrite("intra_rate", &Topology::intra_rate)
      .def_readwrite("cross_coef", &Topology::cross_coef)
      .def_readwrite("hub", &Topology::hub)
      .def("adjacency", &Topology::adjacency)
      .def("contact_matrix", &Topology::contact_matrix)
      .def("distances_from", &Topology::distances_from, py::arg("source"));

  py::class_<SeedSpec>(mod, "SeedSpec")
      .def(py::init([](double r0_frac, int infected_seed, double i0_seed, double pi_scalar,
                       double horizon) {
             return SeedSpec{r0_frac, infected_seed, i0_seed, pi_scalar, horizon};
           }),
           py::arg("r0_frac") = 0.2, py::arg("infected_seed") = 0, py::arg("i0_seed") = 0.3,
           py::arg("pi_scalar") = 0.0, py::arg("horizon") = 35.0)
      .def_readwrite("r0_frac", &SeedSpec::r0_frac)
      .def_readwrite("infected_seed", &SeedSpec::infected_seed)
      .def_readwrite("i0_seed", &SeedSpec::i0_seed)
      .def_readwrite("pi_scalar", &SeedSpec::pi_scalar)
      .def_readwrite("horizon", &SeedSpec::horizon);

  py::class_<NetworkModel>(mod, "NetworkModel")
      .def(py::init<>())
      .def_readwrite("beta", &NetworkModel::beta)
      .def_readwrite("beta_bar", &NetworkModel::beta_bar)
      .def_readwrite("pi", &NetworkModel::pi)
      .def_readwrite("s0", &NetworkModel::s0)
      .def_readwrite("i0", &NetworkModel::i0)
      .def_readwrite("r0", &NetworkModel::r0)
      .def_readwrite("horizon", &NetworkModel::horizon)
      .def_property_readonly("num_types", &NetworkModel::num_types);

  mod.def("build_topology", &build_topology, py::arg("topology"), py::arg("seed"));
  mod.def("validate_model", &validate_model, py::arg("model"));

  py::class_<EffortShape>(mod, "EffortShape")
      .def_static("linear", &EffortShape::linear, py::arg("scale"))
      .def_static("concave_power", &EffortShape::concave_power, py::arg("exponent"),
                  py::arg("scale"))
      .def_static("convex_power", &EffortShape::convex_power, py::arg("exponent"),
                  py::arg("scale"))
      .def_readonly("kind", &EffortShape::kind)
      .def_readonly("scale", &EffortShape::scale)
      .def_readonly("exponent", &EffortShape::exponent)
      .def("value", &EffortShape::value)
      .def("derivative", &EffortShape::derivative)
      .def_property_readonly("bang_bang", &EffortShape::bang_bang);

  py::class_<CostModel>(mod, "CostModel")
      .def(py::init<>())
      .def_static("type_a", &CostModel::type_a, py::arg("k_i"), py::arg("k_u"))
      .def_static("type_b", &CostModel::type_b, py::arg("k_i"), py::arg("k_u"))
      .def_readwrite("infection_weight", &CostModel::infection_weight)
      .def_readwrite("infection_exponent", &CostModel::infection_exponent)
      .def_readwrite("benefit_weight", &CostModel::benefit_weight)
      .def_readwrite("effort", &CostModel::effort)
      .def_readwrite("variant", &CostModel::variant)
      .def_readwrite("reception", &CostModel::reception)
      .def_readwrite("reception_weights", &CostModel::reception_weights);

  py::class_<CostBreakdown>(mod, "CostBreakdown")
      .def_readonly("total", &CostBreakdown::total)
      .def_readonly("infection", &CostBreakdown::infection)
      .def_readonly("benefit", &CostBreakdown::benefit)
      .def_readonly("effort", &CostBreakdown::effort);

  py::class_<TimeGrid>(mod, "TimeGrid")
      .def(py::init<double, int>(), py::arg("horizon"), py::arg("n_steps"))
      .def_readonly("horizon", &TimeGrid::horizon)
      .def_readonly("n_steps", &TimeGrid::n_steps)
      .def_property_readonly("dt", &TimeGrid::dt);

  py::class_<ControlTrajectory>(mod, "ControlTrajectory")
      .def(py::init([](const TimeGrid& grid, const Matrix& u) { return ControlTrajectory{grid, u}; }),
           py::arg("grid"), py::arg("u"))
      .def_static("constant", &ControlTrajectory::constant, py::arg("grid"), py::arg("num_types"),
                  py::arg("level"))
      .def_static("thresholds", &ControlTrajectory::thresholds, py::arg("grid"),
                  py::arg("switch_index"))
      .def_readonly("grid", &ControlTrajectory::grid)
      .def_readonly("u", &ControlTrajectory::u);

  py::class_<StateTrajectory>(mod, "StateTrajectory")
      .def_readonly("grid", &StateTrajectory::grid)
      .def_readonly("s", &StateTrajectory::s)
      .def_readonly("i", &StateTrajectory::i)
      .def_readonly("r", &StateTrajectory::r);

  mod.def("integrate_forward", &integrate_forward, py::arg("model"), py::arg("mode"),
          py::arg("control"));

  py::class_<AdjointTrajectory>(mod, "AdjointTrajectory")
      .def_readonly("lambda_s", &AdjointTrajectory::lambda_s)
      .def_readonly("lambda_i", &AdjointTrajectory::lambda_i)
      .def_readonly("lambda_r", &AdjointTrajectory::lambda_r)
      .def_readonly("phi", &AdjointTrajectory::phi);

  py::class_<TypeThresholds>(mod, "TypeThresholds")
      .def_readonly("drop_off", &TypeThresholds::drop_off)
      .def_readonly("plateau_end", &TypeThresholds::plateau_end)
      .def_readonly("decay_end", &TypeThresholds::decay_end)
      .def_readonly("switch_count", &TypeThresholds::switch_count)
      .def_readonly("distance_from_seed", &TypeThresholds::distance_from_seed);

  py::class_<ThresholdReport>(mod, "ThresholdReport")
      .def_readonly("types", &ThresholdReport::types)
      .def("drop_offs", &ThresholdReport::drop_offs);

  py::class_<SweepConfig>(mod, "SweepConfig")
      .def(py::init([](int n_steps, int max_iterations, double tolerance, double relaxation,
                       double initial_guess, bool polish) {
             SweepConfig c{n_steps, max_iterations, tolerance, relaxation, initial_guess, polish};
             c.validate();
             return c;
           }),
           py::arg("n_steps") = 3500, py::arg("max_iterations") = 500,
           py::arg("tolerance") = 1e-5, py::arg("relaxation") = 0.5,
           py::arg("initial_guess") = 1.0, py::arg("polish") = true)
      .def_readwrite("n_steps", &SweepConfig::n_steps)
      .def_readwrite("max_iterations", &SweepConfig::max_iterations)
      .def_readwrite("tolerance", &SweepConfig::tolerance)
      .def_readwrite("relaxation", &SweepConfig::relaxation)
      .def_readwrite("initial_guess", &SweepConfig::initial_guess)
      .def_readwrite("polish", &SweepConfig::polish);

  py::class_<Convergence>(mod, "Convergence")
      .def_readonly("converged", &Convergence::converged)
      .def_readonly("iterations", &Convergence::iterations)
      .def_readonly("residual", &Convergence::residual)
      .def_readonly("final_relaxation", &Convergence::final_relaxation);

  py::class_<SolveResult>(mod, "SolveResult")
      .def_readonly("mode", &SolveResult::mode)
      .def_readonly("control", &SolveResult::control)
      .def_readonly("states", &SolveResult::states)
      .def_readonly("adjoints", &SolveResult::adjoints)
      .def_readonly("cost", &SolveResult::cost)
      .def_readonly("thresholds", &SolveResult::thresholds)
      .def_readonly("convergence", &SolveResult::convergence)
      .def_readonly("structure_guaranteed", &SolveResult::structure_guaranteed);

  mod.def("forward_backward_sweep", &forward_backward_sweep, py::arg("model"), py::arg("cost"),
          py::arg("mode") = PatchMode::NonReplicative, py::arg("config") = SweepConfig{},
          py::call_guard<py::gil_scoped_release>());
  mod.def("evaluate_control", &evaluate_control, py::arg("model"), py::arg("cost"),
          py::arg("mode"), py::arg("control"));

  py::class_<TypeStructure>(mod, "TypeStructure")
      .def_readonly("switch_count", &TypeStructure::switch_count)
      .def_readonly("single_drop", &TypeStructure::single_drop)
      .def_readonly("min_lambda_i", &TypeStructure::min_lambda_i)
      .def_readonly("min_gap_is", &TypeStructure::min_gap_is)
      .def_readonly("max_phi_rise", &TypeStructure::max_phi_rise);

  py::class_<StructureReport>(mod, "StructureReport")
      .def_readonly("types", &StructureReport::types)
      .def_readonly("guaranteed_by_theory", &StructureReport::guaranteed_by_theory)
      .def_readonly("notes", &StructureReport::notes)
      .def("controls_ok", &StructureReport::controls_ok)
      .def("lemmas_ok", &StructureReport::lemmas_ok, py::arg("slack") = 1e-8);

  mod.def("verify_structure", &verify_structure, py::arg("result"), py::arg("cost"));

  py::class_<PolicySearch>(mod, "PolicySearch")
      .def(py::init<>())
      .def_readwrite("n_steps", &PolicySearch::n_steps)
      .def_readwrite("grid_resolution", &PolicySearch::grid_resolution)
      .def_readwrite("threshold_stride", &PolicySearch::threshold_stride)
      .def_readwrite("surrogate_include_diagonal", &PolicySearch::surrogate_include_diagonal);

  py::class_<HeuristicResult>(mod, "HeuristicResult")
      .def_readonly("kind", &HeuristicResult::kind)
      .def_readonly("parameters", &HeuristicResult::parameters)
      .def_readonly("cost", &HeuristicResult::cost)
      .def_readonly("control", &HeuristicResult::control);

  mod.def("static_policy", &static_policy, py::arg("model"), py::arg("cost"), py::arg("mode"),
          py::arg("search") = PolicySearch{}, py::call_guard<py::gil_scoped_release>());
  mod.def("stratified_static_policy", &stratified_static_policy, py::arg("model"),
          py::arg("cost"), py::arg("mode"), py::arg("search") = PolicySearch{},
          py::call_guard<py::gil_scoped_release>());
  mod.def("spatially_static_policy", &spatially_static_policy, py::arg("model"),
          py::arg("cost"), py::arg("mode"), py::arg("search") = PolicySearch{},
          py::call_guard<py::gil_scoped_release>());
  mod.def("simplified_homogeneous_policy", &simplified_homogeneous_policy, py::arg("model"),
          py::arg("cost"), py::arg("mode"), py::arg("search") = PolicySearch{},
          py::call_guard<py::gil_scoped_release>());
  mod.def("homogeneous_surrogate", &homogeneous_surrogate, py::arg("model"),
          py::arg("include_diagonal") = true);
  mod.def("refined_threshold_oracle", &refined_threshold_oracle, py::arg("model"),
          py::arg("cost"), py::arg("mode"), py::arg("n_steps"), py::arg("stride"),
          py::arg("max_combinations") = 1'000'000, py::call_guard<py::gil_scoped_release>());

  py::class_<Scenario>(mod, "Scenario")
      .def_readwrite("id", &Scenario::id)
      .def_readwrite("topology", &Scenario::topology)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("cost", &Scenario::cost)
      .def_readwrite("mode", &Scenario::mode)
      .def("model", &Scenario::model);

  mod.def("three_region_scenario", &three_region_scenario, py::arg("pi"));
  mod.def("linear_pattern_scenario", &linear_pattern_scenario, py::arg("m"), py::arg("x_coef"),
          py::arg("pi"));
  mod.def("star_pattern_scenario", &star_pattern_scenario, py::arg("peripherals"), py::arg("pi"));
  mod.def("cost_comparison_scenario", &cost_comparison_scenario, py::arg("m"));
  mod.def("rep_vs_nonrep_scenario", &rep_vs_nonrep_scenario, py::arg("m"), py::arg("mode"));

  py::class_<ExperimentOptions>(mod, "ExperimentOptions")
      .def(py::init<>())
      .def_readwrite("solver", &ExperimentOptions::solver)
      .def_readwrite("search", &ExperimentOptions::search)
      .def_readwrite("threads", &ExperimentOptions::threads);

  py::class_<PolicyRow>(mod, "PolicyRow")
      .def_readonly("policy", &PolicyRow::policy)
      .def_readonly("parameters", &PolicyRow::parameters)
      .def_readonly("cost", &PolicyRow::cost)
      .def_readonly("gap_vs_optimal", &PolicyRow::gap_vs_optimal);

  py::class_<ComparisonTable>(mod, "ComparisonTable")
      .def_readonly("scenario", &ComparisonTable::scenario)
      .def_readonly("num_types", &ComparisonTable::num_types)
      .def_readonly("optimal", &ComparisonTable::optimal)
      .def_readonly("converged", &ComparisonTable::converged)
      .def_readonly("rows", &ComparisonTable::rows)
      .def("gap", &ComparisonTable::gap, py::arg("policy"))
      .def("optimal_is_minimum", &ComparisonTable::optimal_is_minimum, py::arg("slack") = 1e-6);

  mod.def("compare_policies", &compare_policies, py::arg("scenario"),
          py::arg("options") = ExperimentOptions{}, py::call_guard<py::gil_scoped_release>());
}
