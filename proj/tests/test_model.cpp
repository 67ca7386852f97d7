#include "support.hpp"

#include <doctest.h>

using namespace stratpatch;

TEST_CASE("linear three-region topology") {
  const Topology topo{TopologyKind::Linear, 3, 0.223, 0.1, 0};
  const SeedSpec seed{0.2, 0, 0.3, 0.0, 35.0};
  const NetworkModel model = build_topology(topo, seed);
  for (int i = 0; i < 3; ++i) CHECK(model.beta(i, i) == doctest::Approx(0.223));
  CHECK(model.beta(0, 1) == doctest::Approx(0.0223));
  CHECK(model.beta(1, 2) == doctest::Approx(0.0223));
  CHECK(model.beta(2, 1) == doctest::Approx(0.0223));
  CHECK(model.beta(0, 2) == 0.0);
  CHECK(model.i0(0) == 0.3);
  CHECK(model.i0(1) == 0.0);
  CHECK(model.i0(2) == 0.0);
  CHECK(model.beta_bar == model.beta);
  CHECK(validate_model(model).empty());
  for (int i = 0; i < 3; ++i) CHECK(model.s0(i) + model.i0(i) + model.r0(i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("complete topology with unit rates") {
  const NetworkModel model = build_topology({TopologyKind::Complete, 2, 1.0, 1.0, 0}, {});
  CHECK(model.beta == Matrix::Ones(2, 2));
}

TEST_CASE("star rows") {
  const NetworkModel model = build_topology({TopologyKind::Star, 5, 0.223, 0.1, 0}, {});
  int hub_edges = 0;
  for (int j = 1; j < 5; ++j) hub_edges += model.beta(0, j) == doctest::Approx(0.0223) ? 1 : 0;
  CHECK(hub_edges == 4);
  for (int i = 1; i < 5; ++i) {
    int edges = 0;
    for (int j = 0; j < 5; ++j) edges += (i != j && model.beta(i, j) > 0.0) ? 1 : 0;
    CHECK(edges == 1);
  }
}

TEST_CASE("distances follow the graph") {
  const Topology line{TopologyKind::Linear, 5, 0.223, 0.1, 0};
  CHECK(line.distances_from(0) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(line.distances_from(2) == std::vector<int>{2, 1, 0, 1, 2});
  const Topology star{TopologyKind::Star, 4, 0.223, 0.1, 0};
  CHECK(star.distances_from(1) == std::vector<int>{1, 0, 2, 2});
}

TEST_CASE("normalization violation is reported") {
  NetworkModel model = build_topology({TopologyKind::Linear, 3, 0.223, 0.1, 0}, {});
  model.s0(1) -= 0.1;
  const auto report = validate_model(model);
  REQUIRE_FALSE(report.empty());
  CHECK(report.front().find("normalization") != std::string::npos);
  CHECK_THROWS_AS(require_valid(model), ModelError);
}

TEST_CASE("disconnected component is reported") {
  NetworkModel model = build_topology({TopologyKind::Linear, 4, 0.223, 0.1, 0}, {});
  model.beta(1, 2) = model.beta(2, 1) = 0.0;
  model.beta_bar = model.beta;
  const auto report = validate_model(model);
  REQUIRE_FALSE(report.empty());
  bool connectivity = false;
  for (const auto& line : report) connectivity = connectivity || line.find("connected") != std::string::npos;
  CHECK(connectivity);
}

TEST_CASE("no infection at all is rejected") {
  SeedSpec seed;
  seed.i0_seed = 0.0;
  const NetworkModel model = build_topology({TopologyKind::Linear, 2, 0.223, 0.1, 0}, seed);
  CHECK_FALSE(validate_model(model).empty());
}

TEST_CASE("out of range inputs throw") {
  SeedSpec seed;
  seed.pi_scalar = 1.5;
  CHECK_THROWS_AS(build_topology({}, seed), ModelError);
  seed = {};
  seed.infected_seed = 3;
  CHECK_THROWS_AS(build_topology({TopologyKind::Linear, 3, 0.223, 0.1, 0}, seed), ModelError);
  CHECK_THROWS_AS(parse_topology_kind("ring"), ModelError);
  CHECK(parse_topology_kind(to_string(TopologyKind::Star)) == TopologyKind::Star);
}

TEST_CASE("asymmetric matrices are accepted") {
  std::mt19937_64 rng(7);
  const NetworkModel model = testing::random_model(rng, 4);
  CHECK(model.beta != model.beta.transpose());
  CHECK(validate_model(model).empty());
}
