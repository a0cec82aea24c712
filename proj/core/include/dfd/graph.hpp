#pragma once

#include <Eigen/Dense>

#include "dfd/errors.hpp"

namespace dfd {

/// Weights whose magnitude falls below this threshold are treated as
/// structurally zero (no edge, no leader link).
inline constexpr double kStructuralZero = 1e-12;

/// Weighted directed communication topology of the follower network.
///
/// Convention: adjacency(i, j) > 0 means agent i receives information from
/// agent j (information flows j -> i). leader_links(i) > 0 means agent i
/// measures the reference signal directly.
struct DirectedGraph {
  Eigen::MatrixXd adjacency;     // n x n, zero diagonal, nonnegative
  Eigen::VectorXd leader_links;  // length n, nonnegative

  int size() const { return static_cast<int>(leader_links.size()); }
  bool has_edge(int i, int j) const { return adjacency(i, j) > kStructuralZero; }
  bool pinned(int i) const { return leader_links(i) > kStructuralZero; }
};

/// Validates and assembles a graph. Throws std::invalid_argument naming the
/// offending entry (1-based indices) on dimension mismatch, negative weight
/// or nonzero diagonal. Strong connectivity is checked separately.
DirectedGraph build_graph(Eigen::MatrixXd adjacency, Eigen::VectorXd leader_links);

/// L = D - A with d_i the i-th row sum of the adjacency matrix.
Eigen::MatrixXd laplacian(const DirectedGraph& g);

/// L + diag(b); the innovation map is y = (L + B) e.
Eigen::MatrixXd coupling_matrix(const DirectedGraph& g);

/// True iff the digraph induced by the information-flow edges has a single
/// strongly connected component covering all vertices (Tarjan).
bool is_strongly_connected(const DirectedGraph& g);

/// Positive left null vector of the Laplacian, scaled to max_i w_i = 1.
/// Requires strong connectivity (AssumptionError otherwise); throws
/// AssumptionError if the numerical null space is not one-dimensional.
Eigen::VectorXd left_null_vector(const DirectedGraph& g);

/// All spectral/structural quantities the gain condition needs.
struct GraphCertificate {
  Eigen::MatrixXd laplacian;  // L
  Eigen::MatrixXd pinning;    // B = diag(leader_links)
  Eigen::VectorXd w;          // positive left null vector, ||w||_inf = 1
  Eigen::MatrixXd g;          // (1/2)(diag(w) L + L^T diag(w)) + diag(w) B, symmetric
  double lambda1 = 0.0;       // smallest eigenvalue of g, positive
};

/// Assembles the certificate. Requires strong connectivity and at least one
/// positive leader link; reports which clause failed. Throws AssumptionError
/// if the certificate matrix is not numerically positive definite.
GraphCertificate graph_certificate(const DirectedGraph& g);

}  // namespace dfd
