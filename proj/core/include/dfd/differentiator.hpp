#pragma once

#include <Eigen/Dense>

#include "dfd/gains.hpp"
#include "dfd/graph.hpp"

namespace dfd {

/// Signed power sgn(x) |x|^a for a >= 0. The a = 0 case is the sign
/// function with sgn(0) = 0, so the vector field vanishes exactly at the
/// origin. Odd in x by construction. Throws std::invalid_argument for a < 0.
double signed_power(double x, double a);
Eigen::VectorXd signed_power(const Eigen::VectorXd& x, double a);

/// Distributed estimator state: per-agent position-like and velocity-like
/// estimates.
struct EstimatorState {
  Eigen::VectorXd p_hat;
  Eigen::VectorXd q_hat;
};

/// Integral channel of the consensus controller, one entry per follower.
struct ControllerState {
  Eigen::VectorXd v;
};

/// Error-system state with the innovation it induces; y = (L + B) e holds
/// whenever both sides are defined.
struct ErrorState {
  Eigen::VectorXd e;
  Eigen::VectorXd z;
  Eigen::VectorXd y;
};

/// Builds a consistent ErrorState, computing y from the coupling matrix.
ErrorState make_error_state(Eigen::VectorXd e, Eigen::VectorXd z, const Eigen::MatrixXd& coupling);

/// Innovation from relative measurements:
///   y_i = sum_j a_ij ((p_i - p_j) - (x_i - x_j)) + b_i (p_i - (x_i - f)).
/// Only pinned agents evaluate the reference term. Algebraically equals
/// (L + B)(p_hat - (x - f 1)).
Eigen::VectorXd innovation_relative(const Eigen::VectorXd& p_hat, const Eigen::VectorXd& x,
                                    double f, const DirectedGraph& g);

/// Innovation from absolute estimates: y_i = sum_j a_ij (p_i - p_j) + b_i (p_i - f).
Eigen::VectorXd innovation_absolute(const Eigen::VectorXd& p_hat, double f,
                                    const DirectedGraph& g);

/// Innovation on outputs: y_i = sum_j a_ij (s_i - s_j) + b_i (s_i - s0).
Eigen::VectorXd innovation_output(const Eigen::VectorXd& s, double s0, const DirectedGraph& g);

/// Relative-information differentiator right-hand side:
///   dp_i = q_i - k1 <y_i>^(1/2),  dq_i = -k2 <y_i>^0 + u_i.
EstimatorState dfd_r_step(const EstimatorState& state, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& u, const GainSet& gains);

/// Absolute-information differentiator right-hand side; computes its own
/// innovation from the absolute estimates and carries no control input.
EstimatorState dfd_a_step(const EstimatorState& state, double f, const DirectedGraph& g,
                          const GainSet& gains);

struct ControlAction {
  Eigen::VectorXd u;      // continuous control, no direct sign of the state
  Eigen::VectorXd v_dot;  // integral channel derivative
  Eigen::VectorXd y;      // output innovation used
};

/// Output-consensus controller:
///   u_i = (v_i - k1 <y_i>^(1/2)) / g_i,  dv_i = -k2 <y_i>^0,
/// with g_i the (strictly positive) input gain of agent i.
ControlAction consensus_control(const Eigen::VectorXd& s, double s0, const ControllerState& state,
                                const Eigen::VectorXd& input_gain, const GainSet& gains,
                                const DirectedGraph& g);

struct ErrorDerivative {
  Eigen::VectorXd e_dot;
  Eigen::VectorXd z_dot;
};

/// Reduced error dynamics, the common mathematical core of all three
/// algorithms and the independent oracle for full-system tests:
///   de = z - k1 <y>^(1/2),  dz = -k2 <y>^0 + d,  y = (L + B) e (recomputed).
ErrorDerivative error_system_step(const ErrorState& err, const Eigen::VectorXd& d,
                                  const GainSet& gains, const Eigen::MatrixXd& coupling);
ErrorDerivative error_system_step(const ErrorState& err, const Eigen::VectorXd& d,
                                  const GainSet& gains, const DirectedGraph& g);

}  // namespace dfd
