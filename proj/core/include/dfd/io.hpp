#pragma once

#include <optional>
#include <string>

#include "dfd/lyapunov.hpp"
#include "dfd/sim.hpp"
#include "dfd/trajectory.hpp"

namespace dfd {

/// Graph JSON: {"n": int, "A": [[...], ...], "b": [...]}.
DirectedGraph parse_graph_json(const std::string& text);
DirectedGraph load_graph(const std::string& path);
std::string graph_to_json(const DirectedGraph& g);

/// Scenario config JSON (schema documented in the README). Relative
/// `graph_file` paths resolve against the config file's directory.
/// Schema violations raise ConfigError with a JSON pointer to the field.
ScenarioConfig parse_scenario_json(const std::string& text, const std::string& base_dir = ".");
ScenarioConfig load_scenario(const std::string& path);

/// Builtin scenario by CLI name ("vi-a", "vi-b", "vi-c").
std::optional<ScenarioConfig> builtin_scenario(const std::string& name);

/// CSV columns, in order and only where the mode produces them:
///   t, x_1..x_n, xdot_1..xdot_n, phat_1..phat_n, qhat_1..qhat_n,
///   y_1..y_n, e_1..e_n, z_1..z_n, u_1..u_n, V, V1, V2
/// Values are shortest round-trip decimal, so every number is exactly
/// reproducible from the file.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

struct RunSummary {
  std::string scenario;
  Mode mode = Mode::DfdA;
  int n = 0;
  double dt = 0.0;
  double t_end = 0.0;
  int decimate = 1;
  double tol = 0.0;
  double window = 0.0;

  bool gains_auto = false;
  GainSet gains;
  std::optional<GainCheck> gain_check;

  double lambda1 = 0.0;
  Eigen::VectorXd w;

  std::optional<double> conv_position;
  std::optional<double> conv_velocity;
  std::optional<double> conv_both;

  double v0 = 0.0;
  std::optional<double> settling_bound;  // absent for degenerate gains

  DecreaseReport lyapunov;

  int disturbance_bound_violations = 0;
  std::optional<double> diverged_at;

  std::string csv_path;
  std::string summary_path;
};

/// Computes every derived number of the summary from the trajectory.
RunSummary summarize(const ScenarioConfig& config, const PreparedScenario& prep,
                     const Trajectory& traj, const std::string& csv_path,
                     const std::string& summary_path);

std::string summary_to_json(const RunSummary& summary);
void write_summary_json(const RunSummary& summary, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace dfd
