#include "containment/topology.h"

#include <cmath>
#include <deque>
#include <sstream>

#include "containment/linalg.h"

namespace containment {

DirectedTopology::DirectedTopology(Eigen::MatrixXd weights, int followers)
    : weights_(std::move(weights)), followers_(followers) {
  const auto n = weights_.rows();
  if (n != weights_.cols()) throw ConfigError("topology: weight matrix must be square");
  if (followers_ < 1 || followers_ >= n) {
    throw ConfigError("topology: follower count must satisfy 1 <= m < n");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = weights_(i, j);
      if (!std::isfinite(a) || a < 0.0) {
        std::ostringstream msg;
        msg << "topology: weight (" << i + 1 << ", " << j + 1 << ") must be finite and >= 0";
        throw ConfigError(msg.str());
      }
    }
    if (weights_(i, i) != 0.0) {
      throw ConfigError("topology: self-loop at agent " + std::to_string(i + 1));
    }
    if (i >= followers_ && weights_.row(i).sum() != 0.0) {
      throw ConfigError("topology: leader " + std::to_string(i + 1) + " receives edges");
    }
  }
}

std::vector<int> DirectedTopology::in_neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < agents(); ++j) {
    if (weights_(i, j) > 0.0) out.push_back(j);
  }
  return out;
}

std::vector<Edge> DirectedTopology::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < agents(); ++i) {
    for (int j : in_neighbors(i)) out.push_back(Edge{j, i});
  }
  return out;
}

ReachabilityReport validate_reachability(const DirectedTopology& topo) {
  const int n = topo.agents();
  std::vector<bool> reached(n, false);
  std::deque<int> frontier;
  for (int l = topo.followers(); l < n; ++l) {
    reached[l] = true;
    frontier.push_back(l);
  }
  while (!frontier.empty()) {
    const int j = frontier.front();
    frontier.pop_front();
    for (int i = 0; i < topo.followers(); ++i) {
      if (!reached[i] && topo.weight(i, j) > 0.0) {
        reached[i] = true;
        frontier.push_back(i);
      }
    }
  }
  ReachabilityReport report;
  for (int i = 0; i < topo.followers(); ++i) {
    if (!reached[i]) report.unreachable.push_back(i);
  }
  report.satisfied = report.unreachable.empty();
  return report;
}

LaplacianPartition partition(const DirectedTopology& topo) {
  const int m = topo.followers();
  const int leaders = topo.leaders();
  const Eigen::MatrixXd& a = topo.weights();
  LaplacianPartition part;
  part.a1 = a.topLeftCorner(m, m);
  part.a2 = a.topRightCorner(m, leaders);
  part.d1 = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double kappa = topo.in_degree(i);
    if (!(kappa > 0.0)) {
      throw ConfigError("partition: follower " + std::to_string(i + 1) + " has zero in-degree");
    }
    part.d1(i, i) = kappa;
  }
  part.l1 = part.d1 - part.a1;
  part.l2 = -part.a2;
  return part;
}

Eigen::MatrixXd reassemble_laplacian(const LaplacianPartition& part) {
  const auto m = part.l1.rows();
  const auto n = m + part.l2.cols();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  l.topLeftCorner(m, m) = part.l1;
  l.topRightCorner(m, n - m) = part.l2;
  return l;
}

ContainmentWeights containment_weights(const LaplacianPartition& part) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(part.l1);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw SingularMatrixError(
        "containment_weights: L1 is singular (some follower is not reachable from a leader)");
  }
  return ContainmentWeights{lu.solve(-part.l2)};
}

bool is_nonsingular_m_matrix(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) > 0.0) return false;
    }
  }
  return eigenvalues(a).real().minCoeff() > kEigenRealPartTol;
}

SmallGainCertificate small_gain_certificate(const LaplacianPartition& part) {
  SmallGainCertificate cert;
  cert.gain_matrix = part.d1.diagonal().cwiseInverse().asDiagonal() * part.a1;
  cert.spectral_radius = spectral_radius(cert.gain_matrix);
  cert.pass = cert.spectral_radius < 1.0 - kSmallGainMargin;
  return cert;
}

DirectedTopology topology_from_blocks(const Eigen::MatrixXd& l1, const Eigen::MatrixXd& l2) {
  const auto m = l1.rows();
  if (l1.cols() != m || l2.rows() != m) throw ConfigError("topology: block shape mismatch");
  const auto n = m + l2.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j) a(i, j) = -l1(i, j);
    }
  }
  a.topRightCorner(m, n - m) = -l2;
  return DirectedTopology(a, static_cast<int>(m));
}

DirectedTopology ten_agent_topology() {
  Eigen::MatrixXd l1(6, 6);
  // clang-format off
  l1 <<  2,  0, -1,  0,  0,  0,
         0,  2, -1,  0,  0,  0,
        -1,  0,  4, -1,  0,  0,
         0,  0, -1,  3, -1, -1,
         0,  0,  0,  0,  3, -1,
         0,  0,  0,  0, -1,  2;
  Eigen::MatrixXd l2(6, 4);
  l2 << -1,  0,  0,  0,
         0, -1,  0,  0,
         0, -1, -1,  0,
         0,  0,  0,  0,
         0, -1, -1,  0,
         0,  0,  0, -1;
  // clang-format on
  return topology_from_blocks(l1, l2);
}

DirectedTopology random_reachable_topology(std::mt19937_64& rng, int max_agents) {
  if (max_agents < 2) throw std::invalid_argument("random topology needs at least two agents");
  std::uniform_int_distribution<int> n_dist(2, max_agents);
  const int n = n_dist(rng);
  std::uniform_int_distribution<int> m_dist(1, n - 1);
  const int m = m_dist(rng);
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double density = 0.15 + 0.35 * coin(rng);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && coin(rng) < density) a(i, j) = weight(rng);
    }
  }
  // Patch unreachable followers with an edge from an already reached node.
  for (;;) {
    const auto report = validate_reachability(DirectedTopology(a, m));
    if (report.satisfied) break;
    std::vector<int> reached;
    std::vector<bool> unreached(n, false);
    for (int i : report.unreachable) unreached[i] = true;
    for (int j = 0; j < n; ++j) {
      if (!unreached[j]) reached.push_back(j);
    }
    std::uniform_int_distribution<std::size_t> pick_target(0, report.unreachable.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_source(0, reached.size() - 1);
    a(report.unreachable[pick_target(rng)], reached[pick_source(rng)]) = weight(rng);
  }
  return DirectedTopology(a, m);
}

}  // namespace containment
