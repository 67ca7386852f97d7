#include "stratpatch/model.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace stratpatch {

namespace {

constexpr double kNormalizationTol = 1e-12;

std::string format_violation(const char* what, int type, double value) {
  std::ostringstream os;
  os << what << " (type " << type << ", value " << value << ")";
  return os.str();
}

}  // namespace

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Linear:
      return "linear";
    case TopologyKind::Star:
      return "star";
    case TopologyKind::Complete:
      return "complete";
  }
  return "unknown";
}

TopologyKind parse_topology_kind(const std::string& name) {
  if (name == "linear") return TopologyKind::Linear;
  if (name == "star") return TopologyKind::Star;
  if (name == "complete") return TopologyKind::Complete;
  throw ModelError("unknown topology kind '" + name + "'");
}

Matrix Topology::adjacency() const {
  if (m < 1) throw ModelError("topology needs at least one type");
  Matrix adj = Matrix::Zero(m, m);
  switch (kind) {
    case TopologyKind::Linear:
      for (int i = 0; i + 1 < m; ++i) adj(i, i + 1) = adj(i + 1, i) = 1.0;
      break;
    case TopologyKind::Star:
      if (hub < 0 || hub >= m) throw ModelError("star hub index out of range");
      for (int i = 0; i < m; ++i) {
        if (i != hub) adj(hub, i) = adj(i, hub) = 1.0;
      }
      break;
    case TopologyKind::Complete:
      adj.setOnes();
      adj.diagonal().setZero();
      break;
  }
  return adj;
}

Matrix Topology::contact_matrix() const {
  Matrix beta = adjacency() * (cross_coef * intra_rate);
  beta.diagonal().setConstant(intra_rate);
  return beta;
}

std::vector<int> Topology::distances_from(int source) const {
  const Matrix adj = adjacency();
  if (source < 0 || source >= m) throw ModelError("distance source out of range");
  std::vector<int> dist(static_cast<std::size_t>(m), -1);
  std::deque<int> queue{source};
  dist[static_cast<std::size_t>(source)] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w = 0; w < m; ++w) {
      if (adj(v, w) > 0.0 && dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

NetworkModel build_topology(const Topology& topology, const SeedSpec& seed) {
  if (topology.m < 1) throw ModelError("topology needs at least one type");
  if (!(seed.horizon > 0.0)) throw ModelError("horizon must be positive");
  if (seed.infected_seed < 0 || seed.infected_seed >= topology.m) {
    throw ModelError("infected seed index out of range");
  }
  if (seed.i0_seed < 0.0 || seed.i0_seed > 1.0) throw ModelError("i0 out of [0,1]");
  if (seed.r0_frac < 0.0 || seed.r0_frac > 1.0) throw ModelError("r0 out of [0,1]");
  if (seed.i0_seed + seed.r0_frac > 1.0) throw ModelError("i0 + r0 exceeds 1");
  if (seed.pi_scalar < 0.0 || seed.pi_scalar > 1.0) throw ModelError("pi out of [0,1]");
  if (!(topology.intra_rate >= 0.0) || !(topology.cross_coef >= 0.0)) {
    throw ModelError("contact rates must be non-negative");
  }

  const int m = topology.m;
  NetworkModel model;
  model.beta = topology.contact_matrix();
  model.beta_bar = model.beta;
  model.pi = Matrix::Constant(m, m, seed.pi_scalar);
  model.i0 = Vector::Zero(m);
  model.i0(seed.infected_seed) = seed.i0_seed;
  model.r0 = Vector::Constant(m, seed.r0_frac);
  model.s0 = (Vector::Ones(m) - model.i0 - model.r0).cwiseMax(0.0);
  model.horizon = seed.horizon;
  return model;
}

std::vector<std::string> validate_model(const NetworkModel& model) {
  std::vector<std::string> report;
  const int m = model.num_types();
  if (m < 1) {
    report.emplace_back("model has no types");
    return report;
  }
  const auto square = [m](const Matrix& a) { return a.rows() == m && a.cols() == m; };
  if (!square(model.beta) || !square(model.beta_bar) || !square(model.pi) ||
      model.i0.size() != m || model.r0.size() != m) {
    report.emplace_back("dimension mismatch between matrices and initial vectors");
    return report;
  }
  if (!(model.horizon > 0.0)) report.emplace_back("horizon must be positive");

  for (int i = 0; i < m; ++i) {
    const double total = model.s0(i) + model.i0(i) + model.r0(i);
    if (std::abs(total - 1.0) > kNormalizationTol) {
      report.push_back(format_violation("normalization s0+i0+r0 != 1", i, total));
    }
    if (model.s0(i) < 0.0 || model.i0(i) < 0.0 || model.r0(i) < 0.0 || model.s0(i) > 1.0 ||
        model.i0(i) > 1.0 || model.r0(i) > 1.0) {
      report.push_back(format_violation("initial fraction outside [0,1]", i, total));
    }
    for (int j = 0; j < m; ++j) {
      if (!(model.beta(i, j) >= 0.0)) {
        report.push_back(format_violation("negative infection rate beta", i, model.beta(i, j)));
      }
      if (!(model.beta_bar(i, j) >= 0.0)) {
        report.push_back(format_violation("negative patch rate beta_bar", i, model.beta_bar(i, j)));
      }
      if (!(model.pi(i, j) >= 0.0 && model.pi(i, j) <= 1.0)) {
        report.push_back(format_violation("healing efficacy pi outside [0,1]", i, model.pi(i, j)));
      }
    }
  }
  if (!report.empty()) return report;

  // j is a neighbour of i when beta(i, j) > 0 and s0(j) > 0.
  std::vector<bool> reached(static_cast<std::size_t>(m), false);
  std::deque<int> queue;
  for (int i = 0; i < m; ++i) {
    if (model.i0(i) > 0.0) {
      reached[static_cast<std::size_t>(i)] = true;
      queue.push_back(i);
    }
  }
  if (queue.empty()) report.emplace_back("no type is initially infected");
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w = 0; w < m; ++w) {
      if (!reached[static_cast<std::size_t>(w)] && model.beta(v, w) > 0.0 && model.s0(w) > 0.0) {
        reached[static_cast<std::size_t>(w)] = true;
        queue.push_back(w);
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    if (!reached[static_cast<std::size_t>(i)]) {
      report.push_back("type " + std::to_string(i) +
                       " is neither initially infected nor connected to an infected type");
    }
  }

  for (int i = 0; i < m; ++i) {
    if (model.r0(i) <= 0.0) continue;
    bool immunizes = false;
    bool infected_from = false;
    bool infects = false;
    for (int j = 0; j < m; ++j) {
      immunizes = immunizes || model.beta_bar(i, j) > 0.0;
      infected_from = infected_from || model.beta(j, i) > 0.0;
      infects = infects || (model.beta(i, j) > 0.0 && model.s0(j) > 0.0);
    }
    if (!immunizes) {
      report.push_back("type " + std::to_string(i) + " holds dispatchers but no beta_bar(i,j) > 0");
    }
    if (!infected_from || !infects) {
      report.push_back("type " + std::to_string(i) +
                       " holds dispatchers but infection cannot spread to and from it");
    }
  }
  return report;
}

void require_valid(const NetworkModel& model) {
  const auto report = validate_model(model);
  if (report.empty()) return;
  std::string message = "invalid model:";
  for (const auto& line : report) message += "\n  - " + line;
  throw ModelError(message);
}

}  // namespace stratpatch
