#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dfd/differentiator.hpp"
#include "dfd/gains.hpp"
#include "dfd/graph.hpp"
#include "dfd/signal.hpp"
#include "dfd/trajectory.hpp"

namespace dfd {

/// Gains are either explicit (k1, k2) or auto-selected as the minimal
/// certified pair for the given rho.
struct GainSpec {
  std::optional<double> k1;
  std::optional<double> k2;
  double rho = 0.75;

  bool auto_select() const { return !k1.has_value() || !k2.has_value(); }
};

/// Full description of one simulation run.
///
/// Mode DfdR:       followers are double integrators xddot_i = u_i + delta_i
///                  (u_i = 0 here), `disturbances` are the delta_i, `leader`
///                  is the reference position f(t).
/// Mode DfdA:       estimator only; `leader` is f(t); disturbances unused.
/// Mode Controller: follower outputs sdot_i = a_i(t) + g_i u_i with
///                  `disturbances` the a_i, `leader` the leader output rate
///                  a0(t), x0 the initial outputs and s0_init the initial
///                  leader output.
struct ScenarioConfig {
  std::string id = "custom";
  Mode mode = Mode::DfdA;
  DirectedGraph graph;
  GainSpec gains;
  double l = 0.0;   // reference acceleration bound (rate-difference bound in controller mode)
  double l1 = 0.0;  // follower disturbance bound
  LeaderSignal leader;
  std::vector<LeaderSignal> disturbances;  // empty = all zero

  Eigen::VectorXd x0;      // follower positions (outputs in controller mode)
  Eigen::VectorXd xdot0;   // follower velocities (DfdR)
  Eigen::VectorXd p_hat0;  // estimator initial conditions
  Eigen::VectorXd q_hat0;
  Eigen::VectorXd v0;          // controller integral channel
  double s0_init = 0.0;        // controller leader output
  Eigen::VectorXd input_gain;  // per-agent g_i > 0 (controller); empty = all one

  double dt = 1e-4;
  double t_end = 20.0;
  double tol = 1e-2;
  double window = 1.0;
  int decimate = 10;
  double divergence_threshold = 1e6;
};

/// Certificate, constants and resolved gains for a scenario; Assumption-1
/// failures surface here as AssumptionError.
struct PreparedScenario {
  GraphCertificate cert;
  DerivedConstants constants;
  GainSet gains;
  std::optional<GainCheck> gain_check;  // absent for the degenerate gain set
};

PreparedScenario prepare(const ScenarioConfig& config);

/// Classical fixed-step 4th-order integration of the coupled system over
/// [0, t_end]. Deterministic: identical configs give bit-identical
/// trajectories. Divergence stops integration and marks the trajectory
/// instead of throwing.
Trajectory integrate(const ScenarioConfig& config);
Trajectory integrate(const ScenarioConfig& config, const PreparedScenario& prep);

/// Direct integration of the reduced error system de = z - k1 <y>^(1/2),
/// dz = -k2 <y>^0 + d with y = (L + B) e. Independent of the estimator /
/// controller code paths; used as the oracle in equivalence tests and for
/// worst-case disturbance studies.
struct ErrorSystemConfig {
  DirectedGraph graph;
  GainSet gains;
  Eigen::VectorXd e0;
  Eigen::VectorXd z0;
  std::vector<LeaderSignal> disturbances;  // d_i(t); empty = all zero
  double dt = 1e-4;
  double t_end = 10.0;
  int decimate = 10;
  double divergence_threshold = 1e6;
};

Trajectory integrate_error_system(const ErrorSystemConfig& config);

enum class ErrorChannel { Position, Velocity, Both };

/// Earliest t* such that the max-norm of the selected error channel stays
/// below tol on [t*, t* + window]; nullopt when no such time fits the
/// horizon. Throws std::invalid_argument when window exceeds the horizon.
std::optional<double> convergence_time(const Trajectory& traj, ErrorChannel channel,
                                       double tol, double window);

/// Four followers in a unit-weight directed ring with the leader pinned to
/// the first agent; the default topology used by the bundled scenarios.
DirectedGraph surrogate_topology();

/// Bundled demonstration scenarios (relative estimation, absolute
/// estimation, output consensus).
ScenarioConfig scenario_vi_a();
ScenarioConfig scenario_vi_b();
ScenarioConfig scenario_vi_c();

}  // namespace dfd
