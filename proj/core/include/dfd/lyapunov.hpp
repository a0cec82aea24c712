#pragma once

#include <Eigen/Dense>
#include <limits>

#include "dfd/differentiator.hpp"
#include "dfd/gains.hpp"
#include "dfd/graph.hpp"
#include "dfd/trajectory.hpp"

namespace dfd {

/// Exact antiderivative evaluation of
///   sum_i w_i integral_{<v_i>^2}^{y_i} (<s>^(1/2) - v_i) ds
///     = sum_i w_i ( (2/3)|y_i|^(3/2) - v_i y_i + (1/3)|v_i|^3 ).
/// Each summand is nonnegative, zero exactly at y_i = <v_i>^2; negative
/// rounding dust is clamped per component.
double v1_closed_form(const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                      const Eigen::VectorXd& w);

/// (1/3) sum_i |v_i|^3
double v2(const Eigen::VectorXd& v);

struct LyapunovSample {
  double t = 0.0;
  double V = 0.0;
  double V1 = 0.0;
  double V2 = 0.0;
  double decrease_margin = std::numeric_limits<double>::quiet_NaN();
};

/// V = V1 + gamma0 V2 on an error state, with v = z / k1. Validates the
/// innovation identity y = (L + B) e before evaluating; throws
/// std::invalid_argument on inconsistency or degenerate gains.
LyapunovSample v_total(const ErrorState& err, const GainSet& gains,
                       const GraphCertificate& cert);

/// Decrease-certification report against dV/dt <= -k gamma2^(-2/3) V^(2/3).
struct DecreaseReport {
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::quiet_NaN();
  int samples_checked = 0;
  double v_floor = 0.0;
  double slack = 0.0;
};

/// Central-difference check of the decrease inequality along the
/// undecimated Lyapunov stream. Samples with V <= v_floor are skipped (the
/// chattering band makes pointwise dV/dt noisy there); the slack absorbs
/// the discretization error of the discontinuous right-hand side,
/// slack = slack_scale * dt * (k1^2 + k2). Diagnostic only, never a gate.
DecreaseReport certify_decrease(const Trajectory& traj, const GainSet& gains,
                                double v_floor = 1e-6, double slack_scale = 10.0);

}  // namespace dfd
