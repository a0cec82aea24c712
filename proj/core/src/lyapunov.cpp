#include "dfd/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfd {

double v1_closed_form(const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                      const Eigen::VectorXd& w) {
  if (y.size() != v.size() || y.size() != w.size()) {
    throw std::invalid_argument("v1 inputs must have matching length");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double ay = std::abs(y(i));
    const double av = std::abs(v(i));
    const double term = (2.0 / 3.0) * ay * std::sqrt(ay) - v(i) * y(i) + av * av * av / 3.0;
    total += w(i) * std::max(term, 0.0);
  }
  return total;
}

double v2(const Eigen::VectorXd& v) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double av = std::abs(v(i));
    total += av * av * av;
  }
  return total / 3.0;
}

LyapunovSample v_total(const ErrorState& err, const GainSet& gains,
                       const GraphCertificate& cert) {
  if (gains.degenerate()) {
    throw std::invalid_argument("Lyapunov evaluation requires k1 > 0");
  }
  const Eigen::Index n = err.e.size();
  if (err.z.size() != n || err.y.size() != n || cert.w.size() != n) {
    throw std::invalid_argument("error state dimensions do not match the certificate");
  }

  const Eigen::VectorXd expected = (cert.laplacian + cert.pinning) * err.e;
  const double tol = 1e-9 * static_cast<double>(n) *
                     std::max(1.0, expected.cwiseAbs().maxCoeff());
  if ((err.y - expected).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("innovation vector is inconsistent with (L + B) e");
  }

  const Eigen::VectorXd v = err.z / gains.k1;
  LyapunovSample s;
  s.V1 = v1_closed_form(err.y, v, cert.w);
  s.V2 = v2(v);
  s.V = s.V1 + gains.gamma0 * s.V2;
  return s;
}

DecreaseReport certify_decrease(const Trajectory& traj, const GainSet& gains,
                                double v_floor, double slack_scale) {
  if (traj.lyap_t.size() < 3) {
    throw std::invalid_argument("trajectory too short for decrease certification (< 3 samples)");
  }
  if (gains.degenerate()) {
    throw std::invalid_argument("decrease certification requires positive gains");
  }

  DecreaseReport r;
  r.v_floor = v_floor;
  r.slack = slack_scale * traj.dt * (gains.k1 * gains.k1 + gains.k2);

  const double bound_coeff = gains.k * std::pow(gains.gamma2, -2.0 / 3.0);
  const auto& vv = traj.lyap_v;
  double worst = -std::numeric_limits<double>::infinity();

  for (std::size_t i = 1; i + 1 < vv.size(); ++i) {
    if (vv[i] <= v_floor) continue;
    const double dvdt = (vv[i + 1] - vv[i - 1]) / (2.0 * traj.dt);
    const double margin = dvdt + bound_coeff * std::pow(vv[i], 2.0 / 3.0);
    ++r.samples_checked;
    worst = std::max(worst, margin);
    if (margin > r.slack) ++r.violations;
  }
  if (r.samples_checked > 0) r.worst_margin = worst;
  return r;
}

}  // namespace dfd
