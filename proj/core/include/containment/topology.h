#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "containment/types.h"

namespace containment {

inline constexpr double kWeightNonnegativityTol = 1e-12;
inline constexpr double kRowSumTol = 1e-9;
inline constexpr double kEigenRealPartTol = 1e-10;
inline constexpr double kSmallGainMargin = 1e-10;

/// Weighted directed interconnection graph with agents 0..m-1 as followers
/// and m..n-1 as leaders. Entry (i, j) of the weight matrix is the weight of
/// edge j -> i.
class DirectedTopology {
 public:
  /// Throws ConfigError if the matrix is not square, has negative or
  /// non-finite entries, a nonzero diagonal, or a nonzero leader row.
  DirectedTopology(Eigen::MatrixXd weights, int followers);

  int agents() const { return static_cast<int>(weights_.rows()); }
  int followers() const { return followers_; }
  int leaders() const { return agents() - followers_; }
  bool is_leader(int i) const { return i >= followers_; }

  const Eigen::MatrixXd& weights() const { return weights_; }
  double weight(int to, int from) const { return weights_(to, from); }
  double in_degree(int i) const { return weights_.row(i).sum(); }

  /// Senders j with a_ij > 0, in increasing index order.
  std::vector<int> in_neighbors(int i) const;
  /// Every edge with positive weight, ordered by receiver then sender.
  std::vector<Edge> edges() const;

 private:
  Eigen::MatrixXd weights_;
  int followers_;
};

struct ReachabilityReport {
  bool satisfied = false;
  std::vector<int> unreachable;  // zero-based follower indices
};

/// Every follower must be reachable along edge direction from some leader.
ReachabilityReport validate_reachability(const DirectedTopology& topo);

struct LaplacianPartition {
  Eigen::MatrixXd l1;  // m x m
  Eigen::MatrixXd l2;  // m x (n - m)
  Eigen::MatrixXd d1;  // m x m diagonal in-degrees
  Eigen::MatrixXd a1;  // follower-to-follower adjacency
  Eigen::MatrixXd a2;  // leader-to-follower adjacency
};

/// Throws ConfigError when some follower has zero in-degree.
LaplacianPartition partition(const DirectedTopology& topo);

/// Full n x n Laplacian rebuilt from the blocks (leader rows zero).
Eigen::MatrixXd reassemble_laplacian(const LaplacianPartition& part);

struct ContainmentWeights {
  Eigen::MatrixXd w;  // -L1^{-1} L2, rows are convex combinations of leaders
};

/// Solves L1 W = -L2. Throws SingularMatrixError when L1 is singular.
ContainmentWeights containment_weights(const LaplacianPartition& part);

bool is_nonsingular_m_matrix(const Eigen::MatrixXd& a);

struct SmallGainCertificate {
  Eigen::MatrixXd gain_matrix;  // D1^{-1} A1
  double spectral_radius = 0.0;
  bool pass = false;
};

SmallGainCertificate small_gain_certificate(const LaplacianPartition& part);

/// The ten-agent graph (six followers, four leaders) used by the bundled
/// scenarios, rebuilt from its L1 and L2 blocks.
DirectedTopology ten_agent_topology();

/// Builds a topology from follower Laplacian blocks.
DirectedTopology topology_from_blocks(const Eigen::MatrixXd& l1, const Eigen::MatrixXd& l2);

/// Random topology with 2 <= n <= max_agents that satisfies the reachability
/// assumption. Weights are drawn from [0.1, 2].
DirectedTopology random_reachable_topology(std::mt19937_64& rng, int max_agents);

}  // namespace containment
