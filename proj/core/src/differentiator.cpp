#include "dfd/differentiator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dfd {
namespace {

void require_size(const Eigen::VectorXd& v, int n, const char* name) {
  if (v.size() != n) {
    std::ostringstream os;
    os << name << " has length " << v.size() << ", expected " << n;
    throw std::invalid_argument(os.str());
  }
}

void require_finite(const Eigen::VectorXd& v, const char* name) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(name) + " contains non-finite entries");
  }
}

}  // namespace

double signed_power(double x, double a) {
  if (a < 0.0) throw std::invalid_argument("signed power exponent must be nonnegative");
  if (x > 0.0) return a == 0.0 ? 1.0 : std::pow(x, a);
  if (x < 0.0) return a == 0.0 ? -1.0 : -std::pow(-x, a);
  return 0.0;
}

Eigen::VectorXd signed_power(const Eigen::VectorXd& x, double a) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = signed_power(x(i), a);
  return out;
}

ErrorState make_error_state(Eigen::VectorXd e, Eigen::VectorXd z, const Eigen::MatrixXd& coupling) {
  if (e.size() != z.size() || e.size() != coupling.rows()) {
    throw std::invalid_argument("error state dimensions do not match the coupling matrix");
  }
  ErrorState s;
  s.y = coupling * e;
  s.e = std::move(e);
  s.z = std::move(z);
  return s;
}

Eigen::VectorXd innovation_relative(const Eigen::VectorXd& p_hat, const Eigen::VectorXd& x,
                                    double f, const DirectedGraph& g) {
  const int n = g.size();
  require_size(p_hat, n, "p_hat");
  require_size(x, n, "x");
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = g.adjacency(i, j);
      if (a > kStructuralZero) {
        acc += a * ((p_hat(i) - p_hat(j)) - (x(i) - x(j)));
      }
    }
    if (g.pinned(i)) {
      acc += g.leader_links(i) * (p_hat(i) - (x(i) - f));
    }
    y(i) = acc;
  }
  return y;
}

Eigen::VectorXd innovation_absolute(const Eigen::VectorXd& p_hat, double f,
                                    const DirectedGraph& g) {
  const int n = g.size();
  require_size(p_hat, n, "p_hat");
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = g.adjacency(i, j);
      if (a > kStructuralZero) acc += a * (p_hat(i) - p_hat(j));
    }
    if (g.pinned(i)) acc += g.leader_links(i) * (p_hat(i) - f);
    y(i) = acc;
  }
  return y;
}

Eigen::VectorXd innovation_output(const Eigen::VectorXd& s, double s0, const DirectedGraph& g) {
  return innovation_absolute(s, s0, g);
}

EstimatorState dfd_r_step(const EstimatorState& state, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& u, const GainSet& gains) {
  const int n = static_cast<int>(state.p_hat.size());
  require_size(state.q_hat, n, "q_hat");
  require_size(y, n, "y");
  require_size(u, n, "u");
  require_finite(state.p_hat, "p_hat");
  require_finite(state.q_hat, "q_hat");
  require_finite(y, "y");
  require_finite(u, "u");

  EstimatorState d;
  d.p_hat = state.q_hat - gains.k1 * signed_power(y, 0.5);
  d.q_hat = -gains.k2 * signed_power(y, 0.0) + u;
  return d;
}

EstimatorState dfd_a_step(const EstimatorState& state, double f, const DirectedGraph& g,
                          const GainSet& gains) {
  require_size(state.q_hat, g.size(), "q_hat");
  require_finite(state.p_hat, "p_hat");
  require_finite(state.q_hat, "q_hat");
  if (!std::isfinite(f)) throw std::invalid_argument("f is non-finite");

  const Eigen::VectorXd y = innovation_absolute(state.p_hat, f, g);
  EstimatorState d;
  d.p_hat = state.q_hat - gains.k1 * signed_power(y, 0.5);
  d.q_hat = -gains.k2 * signed_power(y, 0.0);
  return d;
}

ControlAction consensus_control(const Eigen::VectorXd& s, double s0, const ControllerState& state,
                                const Eigen::VectorXd& input_gain, const GainSet& gains,
                                const DirectedGraph& g) {
  const int n = g.size();
  require_size(s, n, "s");
  require_size(state.v, n, "v");
  require_size(input_gain, n, "input_gain");
  if (input_gain.minCoeff() <= 0.0) {
    throw std::invalid_argument("input gain must be strictly positive for every agent");
  }

  ControlAction act;
  act.y = innovation_output(s, s0, g);
  act.u = (state.v - gains.k1 * signed_power(act.y, 0.5)).cwiseQuotient(input_gain);
  act.v_dot = -gains.k2 * signed_power(act.y, 0.0);
  return act;
}

ErrorDerivative error_system_step(const ErrorState& err, const Eigen::VectorXd& d,
                                  const GainSet& gains, const Eigen::MatrixXd& coupling) {
  const int n = static_cast<int>(err.e.size());
  require_size(err.z, n, "z");
  require_size(d, n, "d");
  if (coupling.rows() != n || coupling.cols() != n) {
    throw std::invalid_argument("coupling matrix dimension mismatch");
  }

  const Eigen::VectorXd y = coupling * err.e;
  ErrorDerivative out;
  out.e_dot = err.z - gains.k1 * signed_power(y, 0.5);
  out.z_dot = -gains.k2 * signed_power(y, 0.0) + d;
  return out;
}

ErrorDerivative error_system_step(const ErrorState& err, const Eigen::VectorXd& d,
                                  const GainSet& gains, const DirectedGraph& g) {
  return error_system_step(err, d, gains, coupling_matrix(g));
}

}  // namespace dfd
