#pragma once

#include <Eigen/Dense>

namespace dfd {

/// Constants derived from the design parameter rho, the left null vector w
/// and the signal bounds l (reference acceleration) and l1 (disturbance):
///   l2     = l + l1
///   gamma1 = (1 + rho) max_i w_i
///   gamma0 = (1 + 3 gamma1) / (1 - rho)
///   gamma2 = 2 gamma1 / (1 + rho) + gamma0 / 3
struct DerivedConstants {
  double rho = 0.0;
  double l = 0.0;
  double l1 = 0.0;
  double max_w = 0.0;
  double l2 = 0.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

DerivedConstants derived_constants(double rho, const Eigen::VectorXd& w, double l, double l1);

/// Estimator/controller gains together with the constants they were derived
/// under. k = k2 / k1 (zero for the degenerate all-zero gain set).
struct GainSet {
  double k1 = 0.0;
  double k2 = 0.0;
  double rho = 0.0;
  double l = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double k = 0.0;

  /// True when the gain pair cannot drive a simulation (k1 or k2 zero);
  /// happens only for minimal gains with l2 = 0, where the finite-time
  /// claim needs strictly positive k2.
  bool degenerate() const { return !(k1 > 0.0) || !(k2 > 0.0); }
};

/// Wraps explicit user gains (must be positive) with the derived constants.
GainSet make_gain_set(double k1, double k2, const DerivedConstants& c);

/// Smallest gain pair satisfying the sufficient condition with equality:
///   k2 = l2 / rho,  k1 = sqrt((2 (gamma0 + gamma1) + 1) / lambda1 * k2).
/// l2 = 0 yields the degenerate all-zero set.
GainSet minimal_gains(double lambda1, const DerivedConstants& c);

/// Margin report for the two inequalities of the sufficient gain condition.
/// Violations never throw: gains that fail the (conservative, sufficient)
/// condition remain simulable, they are just not certified.
struct GainCheck {
  double k2_required = 0.0;
  double k1_required = 0.0;
  double k2_margin = 0.0;  // k2 - k2_required
  double k1_margin = 0.0;  // k1 - k1_required (at the actual k2)
  bool k2_satisfied = false;
  bool k1_satisfied = false;
  bool certified() const { return k1_satisfied && k2_satisfied; }
};

GainCheck check_gains(double k1, double k2, double lambda1, const DerivedConstants& c);

/// Settling-time bound 3 gamma2^(2/3) v0 / k, the stated consequence of
/// dV/dt <= -k gamma2^(-2/3) V^(2/3). Linear in v0.
double settling_time_bound(double v0, double k, double gamma2);

}  // namespace dfd
