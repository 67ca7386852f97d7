#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace stratpatch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a model (or a request to build one) violates a precondition.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Stratified SIR network: M types with pairwise infection and patch contact
/// rates.  Row index is the contacting type: beta(i, j) is the rate at which
/// type i nodes contact type j nodes.  pi(j, i) is the efficacy with which a
/// type j dispatcher heals a type i infective.
struct NetworkModel {
  Matrix beta;
  Matrix beta_bar;
  Matrix pi;
  Vector s0;
  Vector i0;
  Vector r0;
  double horizon = 0.0;

  [[nodiscard]] int num_types() const noexcept { return static_cast<int>(s0.size()); }
};

enum class TopologyKind { Linear, Star, Complete };

/// Regular contact structure used by the benchmark scenarios.  Off-diagonal
/// rates are cross_coef * intra_rate on graph edges, zero elsewhere.
struct Topology {
  TopologyKind kind = TopologyKind::Linear;
  int m = 1;
  double intra_rate = 0.223;
  double cross_coef = 0.1;
  int hub = 0;  // star centre; ignored for other kinds

  [[nodiscard]] Matrix adjacency() const;
  [[nodiscard]] Matrix contact_matrix() const;
  /// Hop distance of every type from `source` in the topology graph.
  [[nodiscard]] std::vector<int> distances_from(int source) const;
};

/// Epidemic initial condition for build_topology: one seeded type, uniform
/// dispatcher fraction and uniform healing efficacy.
struct SeedSpec {
  double r0_frac = 0.2;
  int infected_seed = 0;
  double i0_seed = 0.3;
  double pi_scalar = 0.0;
  double horizon = 35.0;
};

std::string to_string(TopologyKind kind);
TopologyKind parse_topology_kind(const std::string& name);

/// Builds the model for a regular topology, with beta_bar = beta.
/// Throws ModelError on out-of-range inputs.
NetworkModel build_topology(const Topology& topology, const SeedSpec& seed);

/// Lists every violated model precondition; empty when admissible.
std::vector<std::string> validate_model(const NetworkModel& model);

/// Throws ModelError carrying the validate_model report when it is not empty.
void require_valid(const NetworkModel& model);

}  // namespace stratpatch
