#include "dfd/graph.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace dfd {
namespace {

std::string entry(int i, int j) {
  std::ostringstream os;
  os << "(" << (i + 1) << "," << (j + 1) << ")";
  return os.str();
}

double inf_norm(const Eigen::MatrixXd& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

DirectedGraph build_graph(Eigen::MatrixXd adjacency, Eigen::VectorXd leader_links) {
  const auto rows = adjacency.rows();
  const auto cols = adjacency.cols();
  if (rows != cols) {
    std::ostringstream os;
    os << "adjacency matrix must be square, got " << rows << "x" << cols;
    throw std::invalid_argument(os.str());
  }
  if (leader_links.size() != rows) {
    std::ostringstream os;
    os << "leader link vector has length " << leader_links.size() << ", expected " << rows;
    throw std::invalid_argument(os.str());
  }

  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double a = adjacency(i, j);
      if (!std::isfinite(a)) {
        throw std::invalid_argument("non-finite weight at " + entry(i, j));
      }
      if (a < -kStructuralZero) {
        throw std::invalid_argument("negative weight at " + entry(i, j));
      }
      if (i == j && std::abs(a) > kStructuralZero) {
        throw std::invalid_argument("nonzero diagonal at " + entry(i, j));
      }
      if (std::abs(a) <= kStructuralZero) adjacency(i, j) = 0.0;
    }
  }
  for (int i = 0; i < rows; ++i) {
    const double b = leader_links(i);
    if (!std::isfinite(b)) {
      std::ostringstream os;
      os << "non-finite leader link at index " << (i + 1);
      throw std::invalid_argument(os.str());
    }
    if (b < -kStructuralZero) {
      std::ostringstream os;
      os << "negative leader link at index " << (i + 1);
      throw std::invalid_argument(os.str());
    }
    if (std::abs(b) <= kStructuralZero) leader_links(i) = 0.0;
  }

  return DirectedGraph{std::move(adjacency), std::move(leader_links)};
}

Eigen::MatrixXd laplacian(const DirectedGraph& g) {
  Eigen::MatrixXd l = -g.adjacency;
  for (int i = 0; i < g.size(); ++i) {
    l(i, i) = g.adjacency.row(i).sum();
  }
  return l;
}

Eigen::MatrixXd coupling_matrix(const DirectedGraph& g) {
  Eigen::MatrixXd m = laplacian(g);
  m.diagonal() += g.leader_links;
  return m;
}

bool is_strongly_connected(const DirectedGraph& g) {
  const int n = g.size();
  if (n <= 1) return true;

  // information edge j -> i when a(i, j) > 0
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (g.has_edge(i, j)) out[static_cast<std::size_t>(j)].push_back(i);
    }
  }

  // iterative Tarjan, counting strongly connected components
  std::vector<int> index(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  stack.reserve(static_cast<std::size_t>(n));
  int next_index = 0;
  int scc_count = 0;

  struct Frame {
    int v;
    std::size_t child;
  };
  std::vector<Frame> call;

  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = next_index++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    call.push_back({root, 0});

    while (!call.empty()) {
      Frame& f = call.back();
      const auto& succ = out[static_cast<std::size_t>(f.v)];
      if (f.child < succ.size()) {
        const int w = succ[f.child++];
        if (index[static_cast<std::size_t>(w)] == -1) {
          index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = next_index++;
          stack.push_back(w);
          on_stack[static_cast<std::size_t>(w)] = 1;
          call.push_back({w, 0});
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(f.v)] =
              std::min(low[static_cast<std::size_t>(f.v)], index[static_cast<std::size_t>(w)]);
        }
      } else {
        const int v = f.v;
        if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
          if (++scc_count > 1) return false;
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = 0;
          } while (w != v);
        }
        call.pop_back();
        if (!call.empty()) {
          low[static_cast<std::size_t>(call.back().v)] =
              std::min(low[static_cast<std::size_t>(call.back().v)], low[static_cast<std::size_t>(v)]);
        }
      }
    }
  }
  return scc_count == 1;
}

Eigen::VectorXd left_null_vector(const DirectedGraph& g) {
  if (!is_strongly_connected(g)) {
    throw AssumptionError("Assumption 1 violated: not strongly connected");
  }
  const int n = g.size();
  if (n == 1) return Eigen::VectorXd::Ones(1);

  const Eigen::MatrixXd l = laplacian(g);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(l.transpose(), Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();  // descending
  const double scale = std::max(sigma(0), 1.0);
  if (sigma(n - 2) <= 1e-8 * scale) {
    throw AssumptionError("degenerate Laplacian spectrum: numerical null space dimension > 1");
  }

  Eigen::VectorXd w = svd.matrixV().col(n - 1);
  if (w.sum() < 0.0) w = -w;
  if (w.minCoeff() <= 0.0) {
    throw AssumptionError("left null vector has nonpositive entries (numerically degenerate)");
  }
  w /= w.maxCoeff();

  const double residual = (w.transpose() * l).cwiseAbs().maxCoeff();
  if (residual > 1e-10 * n * std::max(1.0, inf_norm(l))) {
    throw AssumptionError("left null vector residual exceeds tolerance");
  }
  return w;
}

GraphCertificate graph_certificate(const DirectedGraph& g) {
  if (!is_strongly_connected(g)) {
    throw AssumptionError("Assumption 1 violated: not strongly connected");
  }
  if (g.leader_links.maxCoeff() <= kStructuralZero) {
    throw AssumptionError("Assumption 1 violated: no agent is pinned to the leader");
  }

  GraphCertificate cert;
  cert.laplacian = laplacian(g);
  cert.pinning = Eigen::MatrixXd(g.leader_links.asDiagonal());
  cert.w = left_null_vector(g);

  const Eigen::MatrixXd wl = cert.w.asDiagonal() * cert.laplacian;
  Eigen::MatrixXd gm = 0.5 * (wl + wl.transpose());
  gm.diagonal() += cert.w.cwiseProduct(g.leader_links);
  cert.g = std::move(gm);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cert.g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw AssumptionError("eigenvalue computation for the certificate matrix failed");
  }
  cert.lambda1 = es.eigenvalues()(0);

  const double threshold = 1e-9 * g.size() * std::max(1.0, inf_norm(cert.laplacian));
  if (cert.lambda1 <= threshold) {
    throw AssumptionError("certificate matrix is not numerically positive definite");
  }
  return cert;
}

}  // namespace dfd
