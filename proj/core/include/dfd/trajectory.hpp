#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dfd {

enum class Mode { DfdR, DfdA, Controller, ErrorSystem };

std::string to_string(Mode mode);

/// Fixed-step simulation record. Channel families are flat row-major
/// arrays ([step * n + agent]); an empty family means the mode does not
/// produce that quantity. The Lyapunov stream (lyap_t, lyap_v) is kept at
/// every integration step even when rows are decimated, so decrease
/// certification never sees a coarsened grid.
struct Trajectory {
  Mode mode = Mode::DfdA;
  int n = 0;
  double dt = 0.0;   // integration step
  int decimate = 1;  // rows recorded every `decimate` steps

  std::vector<double> t;

  // per-agent families
  std::vector<double> x;      // follower positions (outputs in controller mode)
  std::vector<double> xdot;   // follower velocities
  std::vector<double> p_hat;  // estimator position channel
  std::vector<double> q_hat;  // estimator velocity channel
  std::vector<double> y;      // innovations
  std::vector<double> e;      // errors, position channel
  std::vector<double> z;      // errors, velocity channel
  std::vector<double> u;      // control inputs
  std::vector<double> v_ctrl; // controller integral channel (not exported to CSV)

  // per-step scalars
  std::vector<double> leader_value;  // f(t); leader output in controller mode
  std::vector<double> leader_rate;   // f'(t); leader output rate in controller mode
  std::vector<double> V, V1, V2;

  // undecimated Lyapunov stream
  std::vector<double> lyap_t;
  std::vector<double> lyap_v;

  /// Set when integration stopped on a non-finite or out-of-range state;
  /// holds the last time with a valid state. Recorded rows stop there.
  std::optional<double> diverged_at;

  /// Recorded steps at which max_i |d_i(t)| exceeded l2.
  int disturbance_bound_violations = 0;

  std::size_t steps() const { return t.size(); }
  double at(const std::vector<double>& family, std::size_t step, int agent) const {
    return family[step * static_cast<std::size_t>(n) + static_cast<std::size_t>(agent)];
  }
};

}  // namespace dfd
