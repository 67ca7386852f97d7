#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace stratpatch;

namespace {

// Independent evaluation of the vector field with explicit sums.
Compartments oracle_rhs(const NetworkModel& model, const Compartments& x, const Vector& u,
                        bool replicative) {
  const int m = model.num_types();
  Compartments d{Vector::Zero(m), Vector::Zero(m), Vector::Zero(m)};
  for (int i = 0; i < m; ++i) {
    double infection = 0.0;
    double patching = 0.0;
    double healing = 0.0;
    for (int j = 0; j < m; ++j) {
      const double dispatchers = replicative ? x.r(j) : model.r0(j);
      infection += model.beta(j, i) * x.i(j);
      patching += model.beta_bar(j, i) * dispatchers * u(j);
      healing += model.pi(j, i) * model.beta_bar(j, i) * dispatchers * u(j);
    }
    d.s(i) = -x.s(i) * infection - x.s(i) * patching;
    d.i(i) = x.s(i) * infection - x.i(i) * healing;
    d.r(i) = x.s(i) * patching + x.i(i) * healing;
  }
  return d;
}

double max_abs_diff(const Compartments& a, const Compartments& b) {
  return std::max({(a.s - b.s).cwiseAbs().maxCoeff(), (a.i - b.i).cwiseAbs().maxCoeff(),
                   (a.r - b.r).cwiseAbs().maxCoeff()});
}

}  // namespace

TEST_CASE("hand-evaluated single type derivative") {
  const NetworkModel model = testing::single_type(0.0, 1.0, 1.0, 0.5, 0.3, 0.2, 35.0);
  const Compartments x{Vector::Constant(1, 0.5), Vector::Constant(1, 0.3), Vector::Constant(1, 0.2)};
  const Compartments d = rhs_nonreplicative(model, x, Vector::Constant(1, 1.0));
  CHECK(d.s(0) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(d.i(0) == doctest::Approx(-0.06).epsilon(1e-15));
  CHECK(d.r(0) == doctest::Approx(0.16).epsilon(1e-15));
  const Compartments rep = rhs_replicative(model, x, Vector::Constant(1, 1.0));
  CHECK(max_abs_diff(d, rep) < 1e-15);
}

TEST_CASE("vector field matches explicit sums on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 5;
    const NetworkModel model = testing::random_model(rng, m);
    Compartments x{Vector(m), Vector(m), Vector(m)};
    Vector u(m);
    for (int j = 0; j < m; ++j) {
      const double a = unit(rng);
      const double b = unit(rng) * (1.0 - a);
      x.s(j) = a;
      x.i(j) = b;
      x.r(j) = 1.0 - a - b;
      u(j) = unit(rng);
    }
    for (const bool replicative : {false, true}) {
      const Compartments d = replicative ? rhs_replicative(model, x, u) : rhs_nonreplicative(model, x, u);
      CHECK(max_abs_diff(d, oracle_rhs(model, x, u, replicative)) < 1e-14);
      CHECK(std::abs(d.s.sum() + d.i.sum() + d.r.sum()) < 1e-14);
      for (int j = 0; j < m; ++j) CHECK(std::abs(d.s(j) + d.i(j) + d.r(j)) < 1e-15);
    }
  }
}

TEST_CASE("no infection and no patching is an equilibrium") {
  std::mt19937_64 rng(3);
  const NetworkModel model = testing::random_model(rng, 3);
  const Compartments x{Vector::Constant(3, 0.6), Vector::Zero(3), Vector::Constant(3, 0.4)};
  for (const PatchMode mode : {PatchMode::NonReplicative, PatchMode::Replicative}) {
    const Compartments d = rhs(mode, model, x, Vector::Zero(3));
    CHECK(d.s.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.i.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.r.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("replicative pool cannot bootstrap from zero") {
  std::mt19937_64 rng(5);
  const NetworkModel model = testing::random_model(rng, 3);
  const Compartments x{Vector::Constant(3, 0.7), Vector::Constant(3, 0.3), Vector::Zero(3)};
  const Compartments d = rhs_replicative(model, x, Vector::Ones(3));
  CHECK(d.r.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetric complete pair stays symmetric") {
  SeedSpec seed;
  seed.i0_seed = 0.0;
  NetworkModel model = build_topology({TopologyKind::Complete, 2, 0.223, 0.5, 0}, seed);
  model.i0.setConstant(0.2);
  model.s0 = Vector::Ones(2) - model.i0 - model.r0;
  const TimeGrid grid(35.0, 3500);
  std::mt19937_64 rng(2);
  ControlTrajectory control = testing::random_control(rng, grid, 1);
  control.u = control.u.replicate(2, 1).eval();
  for (const PatchMode mode : {PatchMode::NonReplicative, PatchMode::Replicative}) {
    const StateTrajectory x = integrate_forward(model, mode, control);
    CHECK((x.s.row(0) - x.s.row(1)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((x.i.row(0) - x.i.row(1)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((x.r.row(0) - x.r.row(1)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("infection spreads region by region") {
  const NetworkModel model = testing::fig1_scenario(0.0).model();
  const TimeGrid grid(model.horizon, 3500);
  const StateTrajectory x =
      integrate_forward(model, PatchMode::NonReplicative, ControlTrajectory::constant(grid, 3, 1.0));
  for (int k = 1; k <= grid.n_steps; ++k) {
    CHECK(x.i(1, k) > 0.0);
    CHECK(x.i(2, k) > 0.0);
    CHECK(x.i(2, k) < x.i(1, k));
  }
}

TEST_CASE("immunize-only patching never lowers infection") {
  const NetworkModel model = testing::fig1_scenario(0.0).model();
  const TimeGrid grid(model.horizon, 3500);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const StateTrajectory x =
        integrate_forward(model, PatchMode::NonReplicative, testing::random_control(rng, grid, 3));
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < grid.n_steps; ++k) CHECK(x.i(j, k + 1) >= x.i(j, k));
    }
  }
}

TEST_CASE("step halving barely moves the final infection") {
  const NetworkModel model = testing::fig1_scenario(1.0).model();
  const auto final_i = [&](int n) {
    const TimeGrid grid(model.horizon, n);
    return integrate_forward(model, PatchMode::NonReplicative, ControlTrajectory::constant(grid, 3, 1.0))
        .i.col(n)
        .eval();
  };
  CHECK((final_i(3500) - final_i(7000)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("random trajectories conserve mass and stay non-negative") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 4;
    const NetworkModel model = testing::random_model(rng, m, 10.0);
    const TimeGrid grid(model.horizon, 500);
    const ControlTrajectory control = testing::random_control(rng, grid, m);
    for (const PatchMode mode : {PatchMode::NonReplicative, PatchMode::Replicative}) {
      const StateTrajectory x = integrate_forward(model, mode, control);
      CHECK(((x.s + x.i + x.r).array() - 1.0).abs().maxCoeff() < 1e-6);
      CHECK(x.s.minCoeff() >= -1e-9);
      CHECK(x.i.minCoeff() >= -1e-9);
      CHECK(x.r.minCoeff() >= -1e-9);
      for (int k = 0; k < grid.n_steps; ++k) {
        CHECK((x.s.col(k + 1).array() <= x.s.col(k).array()).all());
      }
    }
  }
}

TEST_CASE("replicative emulation reproduces the non-replicative trajectory") {
  const NetworkModel model = testing::fig1_scenario(1.0).model();
  const TimeGrid grid(model.horizon, 3500);
  std::mt19937_64 rng(29);
  const ControlTrajectory control = testing::random_control(rng, grid, 3);
  const StateTrajectory base = integrate_forward(model, PatchMode::NonReplicative, control);
  const ControlTrajectory emulated = emulate_with_replicative(model, control, base);
  CHECK(emulated.u.maxCoeff() <= 1.0);
  CHECK(emulated.u.minCoeff() >= 0.0);
  const StateTrajectory copy = integrate_forward(model, PatchMode::Replicative, emulated);
  CHECK((copy.i - base.i).cwiseAbs().maxCoeff() < 1e-5);
  CHECK((copy.s - base.s).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("malformed controls are rejected") {
  const NetworkModel model = testing::fig1_scenario(0.0).model();
  const TimeGrid grid(model.horizon, 100);
  CHECK_THROWS(integrate_forward(model, PatchMode::NonReplicative, ControlTrajectory::constant(grid, 2, 1.0)));
  CHECK_THROWS(integrate_forward(model, PatchMode::NonReplicative, ControlTrajectory::constant(grid, 3, 1.5)));
}
