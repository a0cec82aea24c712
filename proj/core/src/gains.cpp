#include "dfd/gains.hpp"

#include <cmath>
#include <stdexcept>

namespace dfd {
namespace {

double k1_requirement(double k2, double lambda1, const DerivedConstants& c) {
  return std::sqrt((2.0 * (c.gamma0 + c.gamma1) + 1.0) / lambda1 * k2);
}

GainSet fill(double k1, double k2, const DerivedConstants& c) {
  GainSet s;
  s.k1 = k1;
  s.k2 = k2;
  s.rho = c.rho;
  s.l = c.l;
  s.l1 = c.l1;
  s.l2 = c.l2;
  s.gamma0 = c.gamma0;
  s.gamma1 = c.gamma1;
  s.gamma2 = c.gamma2;
  s.k = k1 > 0.0 ? k2 / k1 : 0.0;
  return s;
}

}  // namespace

DerivedConstants derived_constants(double rho, const Eigen::VectorXd& w, double l, double l1) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("rho must lie in (0, 1)");
  }
  if (w.size() == 0 || w.minCoeff() <= 0.0) {
    throw std::invalid_argument("w must be a nonempty strictly positive vector");
  }
  if (l < 0.0 || l1 < 0.0) {
    throw std::invalid_argument("signal bounds l, l1 must be nonnegative");
  }
  DerivedConstants c;
  c.rho = rho;
  c.l = l;
  c.l1 = l1;
  c.max_w = w.maxCoeff();
  c.l2 = l + l1;
  c.gamma1 = (1.0 + rho) * c.max_w;
  c.gamma0 = (1.0 + 3.0 * c.gamma1) / (1.0 - rho);
  c.gamma2 = 2.0 * c.gamma1 / (1.0 + rho) + c.gamma0 / 3.0;
  return c;
}

GainSet make_gain_set(double k1, double k2, const DerivedConstants& c) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) {
    throw std::invalid_argument("gains k1, k2 must be positive");
  }
  return fill(k1, k2, c);
}

GainSet minimal_gains(double lambda1, const DerivedConstants& c) {
  if (!(lambda1 > 0.0)) {
    throw std::invalid_argument("lambda1 must be positive");
  }
  const double k2 = c.l2 / c.rho;
  const double k1 = k1_requirement(k2, lambda1, c);
  return fill(k1, k2, c);
}

GainCheck check_gains(double k1, double k2, double lambda1, const DerivedConstants& c) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) {
    throw std::invalid_argument("gains k1, k2 must be positive");
  }
  if (!(lambda1 > 0.0)) {
    throw std::invalid_argument("lambda1 must be positive");
  }
  GainCheck r;
  r.k2_required = c.l2 / c.rho;
  r.k1_required = k1_requirement(k2, lambda1, c);
  r.k2_margin = k2 - r.k2_required;
  r.k1_margin = k1 - r.k1_required;
  r.k2_satisfied = r.k2_margin >= 0.0;
  r.k1_satisfied = r.k1_margin >= 0.0;
  return r;
}

double settling_time_bound(double v0, double k, double gamma2) {
  if (v0 < 0.0) throw std::invalid_argument("v0 must be nonnegative");
  if (!(k > 0.0)) throw std::invalid_argument("k must be positive");
  if (!(gamma2 > 0.0)) throw std::invalid_argument("gamma2 must be positive");
  return 3.0 * std::pow(gamma2, 2.0 / 3.0) * v0 / k;
}

}  // namespace dfd
