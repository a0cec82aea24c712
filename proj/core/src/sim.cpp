#include "dfd/sim.hpp"

#include <cmath>
#include <sstream>

#include "dfd/lyapunov.hpp"

namespace dfd {
namespace {

template <typename Rhs>
struct Rk4 {
  Eigen::VectorXd k1, k2, k3, k4, tmp;

  void step(const Rhs& rhs, double t, double dt, const Eigen::VectorXd& s, Eigen::VectorXd& out) {
    rhs(t, s, k1);
    tmp = s + (0.5 * dt) * k1;
    rhs(t + 0.5 * dt, tmp, k2);
    tmp = s + (0.5 * dt) * k2;
    rhs(t + 0.5 * dt, tmp, k3);
    tmp = s + dt * k3;
    rhs(t + dt, tmp, k4);
    out = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

void append(std::vector<double>& family, const Eigen::VectorXd& v) {
  family.insert(family.end(), v.data(), v.data() + v.size());
}

double disturbance_at(const std::vector<LeaderSignal>& sigs, int i, double t) {
  if (sigs.empty()) return 0.0;
  return sigs[static_cast<std::size_t>(i)].value(t);
}

double disturbance_rate_at(const std::vector<LeaderSignal>& sigs, int i, double t) {
  if (sigs.empty()) return 0.0;
  return sigs[static_cast<std::size_t>(i)].rate(t);
}

void check_grid(double dt, double t_end, int decimate, double divergence_threshold) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive and finite");
  if (!(t_end > dt)) throw ConfigError("t_end must exceed dt");
  if (decimate < 1) throw ConfigError("decimate must be at least 1");
  if (!(divergence_threshold > 0.0)) throw ConfigError("divergence_threshold must be positive");
}

Eigen::VectorXd resolve_initial(const Eigen::VectorXd& v, int n, const char* field) {
  if (v.size() == 0) return Eigen::VectorXd::Zero(n);
  if (v.size() != n) {
    std::ostringstream os;
    os << "initial condition " << field << " has length " << v.size() << ", expected " << n;
    throw ConfigError(os.str());
  }
  if (!v.allFinite()) {
    throw ConfigError(std::string("initial condition ") + field + " contains non-finite entries");
  }
  return v;
}

/// One integration driver shared by all modes. `record` is called with the
/// current state at every integration step; it owns row decimation and the
/// Lyapunov stream.
template <typename Rhs, typename RecordFn>
void drive(Trajectory& traj, double dt, long long steps, double divergence_threshold,
           Eigen::VectorXd state, const Rhs& rhs, const RecordFn& record) {
  Rk4<Rhs> integrator;
  Eigen::VectorXd next;
  for (long long i = 0;; ++i) {
    const double t = dt * static_cast<double>(i);
    record(t, state, i);
    if (i == steps) break;
    integrator.step(rhs, t, dt, state, next);
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > divergence_threshold) {
      traj.diverged_at = t;
      break;
    }
    state.swap(next);
  }
}

}  // namespace

PreparedScenario prepare(const ScenarioConfig& config) {
  check_grid(config.dt, config.t_end, config.decimate, config.divergence_threshold);
  if (!(config.tol > 0.0)) throw ConfigError("tol must be positive");
  if (config.window < 0.0) throw ConfigError("window must be nonnegative");
  const int n = config.graph.size();
  if (n < 1) throw ConfigError("graph must have at least one agent");
  if (!config.disturbances.empty() && static_cast<int>(config.disturbances.size()) != n) {
    std::ostringstream os;
    os << "disturbances list has length " << config.disturbances.size() << ", expected " << n;
    throw ConfigError(os.str());
  }
  if (!config.gains.auto_select()) {
    if (!(*config.gains.k1 > 0.0) || !(*config.gains.k2 > 0.0)) {
      throw ConfigError("explicit gains k1, k2 must be positive");
    }
  }
  if (!(config.gains.rho > 0.0 && config.gains.rho < 1.0)) {
    throw ConfigError("rho must lie in (0, 1)");
  }
  if (config.l < 0.0 || config.l1 < 0.0) {
    throw ConfigError("signal bounds l, l1 must be nonnegative");
  }

  PreparedScenario prep;
  prep.cert = graph_certificate(config.graph);
  prep.constants = derived_constants(config.gains.rho, prep.cert.w, config.l, config.l1);
  if (config.gains.auto_select()) {
    prep.gains = minimal_gains(prep.cert.lambda1, prep.constants);
  } else {
    prep.gains = make_gain_set(*config.gains.k1, *config.gains.k2, prep.constants);
  }
  if (!prep.gains.degenerate()) {
    prep.gain_check = check_gains(prep.gains.k1, prep.gains.k2, prep.cert.lambda1, prep.constants);
  }
  return prep;
}

Trajectory integrate(const ScenarioConfig& config) { return integrate(config, prepare(config)); }

Trajectory integrate(const ScenarioConfig& config, const PreparedScenario& prep) {
  const int n = config.graph.size();
  const GainSet& gains = prep.gains;
  if (gains.degenerate()) {
    throw ConfigError("simulation requires positive gains; auto selection is degenerate when l2 = 0");
  }

  const long long steps = std::llround(config.t_end / config.dt);
  if (steps < 1) throw ConfigError("t_end must exceed dt");

  Trajectory traj;
  traj.mode = config.mode;
  traj.n = n;
  traj.dt = config.dt;
  traj.decimate = config.decimate;
  const std::size_t rows = static_cast<std::size_t>(steps / config.decimate) + 2;
  traj.t.reserve(rows);
  traj.lyap_t.reserve(static_cast<std::size_t>(steps) + 2);
  traj.lyap_v.reserve(static_cast<std::size_t>(steps) + 2);

  const Eigen::VectorXd& w = prep.cert.w;
  const double gamma0 = gains.gamma0;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  auto push_lyapunov = [&](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                           bool row) -> void {
    const Eigen::VectorXd v = z / gains.k1;
    const double v1 = v1_closed_form(y, v, w);
    const double v2v = v2(v);
    const double vtot = v1 + gamma0 * v2v;
    traj.lyap_t.push_back(t);
    traj.lyap_v.push_back(vtot);
    if (row) {
      traj.V.push_back(vtot);
      traj.V1.push_back(v1);
      traj.V2.push_back(v2v);
    }
  };
  auto track_disturbance = [&](double dmax) {
    if (dmax > gains.l2 * (1.0 + 1e-12)) ++traj.disturbance_bound_violations;
  };

  switch (config.mode) {
    case Mode::DfdR: {
      const Eigen::VectorXd x0 = resolve_initial(config.x0, n, "x");
      const Eigen::VectorXd xdot0 = resolve_initial(config.xdot0, n, "xdot");
      const Eigen::VectorXd p0 = resolve_initial(config.p_hat0, n, "p_hat");
      const Eigen::VectorXd q0 = resolve_initial(config.q_hat0, n, "q_hat");
      Eigen::VectorXd state(4 * n);
      state << x0, xdot0, p0, q0;

      const Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
      auto rhs = [&](double t, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
        const auto x = s.segment(0, n);
        const auto xd = s.segment(n, n);
        EstimatorState est{s.segment(2 * n, n), s.segment(3 * n, n)};
        const double f = config.leader.value(t);
        const Eigen::VectorXd y = innovation_relative(est.p_hat, x, f, config.graph);
        const EstimatorState d = dfd_r_step(est, y, u, gains);
        ds.resize(4 * n);
        ds.segment(0, n) = xd;
        for (int i = 0; i < n; ++i) ds(n + i) = disturbance_at(config.disturbances, i, t);
        ds.segment(2 * n, n) = d.p_hat;
        ds.segment(3 * n, n) = d.q_hat;
      };
      auto record = [&](double t, const Eigen::VectorXd& s, long long i) {
        const auto x = s.segment(0, n);
        const auto xd = s.segment(n, n);
        const auto ph = s.segment(2 * n, n);
        const auto qh = s.segment(3 * n, n);
        const double f = config.leader.value(t);
        const double fdot = config.leader.rate(t);
        const double fddot = config.leader.acceleration(t);
        const Eigen::VectorXd e = ph - (x - f * ones);
        const Eigen::VectorXd z = qh - (xd - fdot * ones);
        const Eigen::VectorXd y = innovation_relative(ph, x, f, config.graph);
        double dmax = 0.0;
        for (int a = 0; a < n; ++a) {
          dmax = std::max(dmax, std::abs(fddot - disturbance_at(config.disturbances, a, t)));
        }
        track_disturbance(dmax);
        const bool row = (i % config.decimate) == 0;
        push_lyapunov(t, y, z, row);
        if (row) {
          traj.t.push_back(t);
          append(traj.x, x);
          append(traj.xdot, xd);
          append(traj.p_hat, ph);
          append(traj.q_hat, qh);
          append(traj.y, y);
          append(traj.e, e);
          append(traj.z, z);
          traj.leader_value.push_back(f);
          traj.leader_rate.push_back(fdot);
        }
      };
      drive(traj, config.dt, steps, config.divergence_threshold, std::move(state), rhs, record);
      break;
    }

    case Mode::DfdA: {
      const Eigen::VectorXd p0 = resolve_initial(config.p_hat0, n, "p_hat");
      const Eigen::VectorXd q0 = resolve_initial(config.q_hat0, n, "q_hat");
      Eigen::VectorXd state(2 * n);
      state << p0, q0;

      auto rhs = [&](double t, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
        EstimatorState est{s.segment(0, n), s.segment(n, n)};
        const EstimatorState d = dfd_a_step(est, config.leader.value(t), config.graph, gains);
        ds.resize(2 * n);
        ds.segment(0, n) = d.p_hat;
        ds.segment(n, n) = d.q_hat;
      };
      auto record = [&](double t, const Eigen::VectorXd& s, long long i) {
        const auto ph = s.segment(0, n);
        const auto qh = s.segment(n, n);
        const double f = config.leader.value(t);
        const double fdot = config.leader.rate(t);
        const Eigen::VectorXd e = ph - f * ones;
        const Eigen::VectorXd z = qh - fdot * ones;
        const Eigen::VectorXd y = innovation_absolute(ph, f, config.graph);
        track_disturbance(std::abs(config.leader.acceleration(t)));
        const bool row = (i % config.decimate) == 0;
        push_lyapunov(t, y, z, row);
        if (row) {
          traj.t.push_back(t);
          append(traj.p_hat, ph);
          append(traj.q_hat, qh);
          append(traj.y, y);
          append(traj.e, e);
          append(traj.z, z);
          traj.leader_value.push_back(f);
          traj.leader_rate.push_back(fdot);
        }
      };
      drive(traj, config.dt, steps, config.divergence_threshold, std::move(state), rhs, record);
      break;
    }

    case Mode::Controller: {
      const Eigen::VectorXd s_init = resolve_initial(config.x0, n, "x");
      const Eigen::VectorXd v_init = resolve_initial(config.v0, n, "v");
      Eigen::VectorXd input_gain = config.input_gain;
      if (input_gain.size() == 0) input_gain = Eigen::VectorXd::Ones(n);
      if (input_gain.size() != n) throw ConfigError("input_gain length does not match agent count");
      if (input_gain.minCoeff() <= 0.0) {
        throw ConfigError("input_gain must be strictly positive for every agent");
      }
      Eigen::VectorXd state(2 * n + 1);
      state.segment(0, n) = s_init;
      state(n) = config.s0_init;
      state.segment(n + 1, n) = v_init;

      auto rhs = [&](double t, const Eigen::VectorXd& st, Eigen::VectorXd& ds) {
        const auto s = st.segment(0, n);
        const double s0 = st(n);
        ControllerState cs{st.segment(n + 1, n)};
        const ControlAction act = consensus_control(s, s0, cs, input_gain, gains, config.graph);
        ds.resize(2 * n + 1);
        for (int i = 0; i < n; ++i) {
          ds(i) = disturbance_at(config.disturbances, i, t) + input_gain(i) * act.u(i);
        }
        ds(n) = config.leader.value(t);  // leader output rate a0(t)
        ds.segment(n + 1, n) = act.v_dot;
      };
      auto record = [&](double t, const Eigen::VectorXd& st, long long i) {
        const auto s = st.segment(0, n);
        const double s0 = st(n);
        ControllerState cs{st.segment(n + 1, n)};
        const ControlAction act = consensus_control(s, s0, cs, input_gain, gains, config.graph);
        const double a0 = config.leader.value(t);
        Eigen::VectorXd z(n);
        double dmax = 0.0;
        for (int a = 0; a < n; ++a) {
          z(a) = cs.v(a) + disturbance_at(config.disturbances, a, t) - a0;
          dmax = std::max(dmax, std::abs(disturbance_rate_at(config.disturbances, a, t) -
                                         config.leader.rate(t)));
        }
        track_disturbance(dmax);
        const Eigen::VectorXd e = s - s0 * ones;
        const bool row = (i % config.decimate) == 0;
        push_lyapunov(t, act.y, z, row);
        if (row) {
          traj.t.push_back(t);
          append(traj.x, s);
          append(traj.y, act.y);
          append(traj.e, e);
          append(traj.z, z);
          append(traj.u, act.u);
          append(traj.v_ctrl, cs.v);
          traj.leader_value.push_back(s0);
          traj.leader_rate.push_back(a0);
        }
      };
      drive(traj, config.dt, steps, config.divergence_threshold, std::move(state), rhs, record);
      break;
    }

    case Mode::ErrorSystem:
      throw ConfigError("mode error_system is driven through integrate_error_system");
  }

  return traj;
}

Trajectory integrate_error_system(const ErrorSystemConfig& config) {
  check_grid(config.dt, config.t_end, config.decimate, config.divergence_threshold);
  const int n = config.graph.size();
  if (config.gains.degenerate()) {
    throw ConfigError("error-system integration requires positive gains");
  }
  if (!config.disturbances.empty() && static_cast<int>(config.disturbances.size()) != n) {
    throw ConfigError("disturbances list length does not match agent count");
  }
  const GraphCertificate cert = graph_certificate(config.graph);
  const Eigen::MatrixXd coupling = cert.laplacian + cert.pinning;
  const GainSet& gains = config.gains;

  const Eigen::VectorXd e0 = resolve_initial(config.e0, n, "e");
  const Eigen::VectorXd z0 = resolve_initial(config.z0, n, "z");
  const long long steps = std::llround(config.t_end / config.dt);

  Trajectory traj;
  traj.mode = Mode::ErrorSystem;
  traj.n = n;
  traj.dt = config.dt;
  traj.decimate = config.decimate;
  traj.lyap_t.reserve(static_cast<std::size_t>(steps) + 2);
  traj.lyap_v.reserve(static_cast<std::size_t>(steps) + 2);

  Eigen::VectorXd state(2 * n);
  state << e0, z0;

  auto rhs = [&](double t, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    ErrorState err;
    err.e = s.segment(0, n);
    err.z = s.segment(n, n);
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d(i) = disturbance_at(config.disturbances, i, t);
    const ErrorDerivative der = error_system_step(err, d, gains, coupling);
    ds.resize(2 * n);
    ds.segment(0, n) = der.e_dot;
    ds.segment(n, n) = der.z_dot;
  };
  auto record = [&](double t, const Eigen::VectorXd& s, long long i) {
    const auto e = s.segment(0, n);
    const auto z = s.segment(n, n);
    const Eigen::VectorXd y = coupling * e;
    const Eigen::VectorXd v = z / gains.k1;
    const double v1 = v1_closed_form(y, v, cert.w);
    const double v2v = v2(v);
    const double vtot = v1 + gains.gamma0 * v2v;
    traj.lyap_t.push_back(t);
    traj.lyap_v.push_back(vtot);
    double dmax = 0.0;
    for (int a = 0; a < n; ++a) {
      dmax = std::max(dmax, std::abs(disturbance_at(config.disturbances, a, t)));
    }
    if (dmax > gains.l2 * (1.0 + 1e-12)) ++traj.disturbance_bound_violations;
    if (i % config.decimate == 0) {
      traj.t.push_back(t);
      append(traj.e, e);
      append(traj.z, z);
      append(traj.y, y);
      traj.V.push_back(vtot);
      traj.V1.push_back(v1);
      traj.V2.push_back(v2v);
    }
  };
  drive(traj, config.dt, steps, config.divergence_threshold, std::move(state), rhs, record);
  return traj;
}

std::optional<double> convergence_time(const Trajectory& traj, ErrorChannel channel, double tol,
                                       double window) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (window < 0.0) throw std::invalid_argument("window must be nonnegative");
  const std::size_t m = traj.steps();
  if (m == 0) throw std::invalid_argument("trajectory has no recorded steps");
  const double horizon = traj.t.back();
  if (window > horizon + 1e-12) {
    throw std::invalid_argument("window exceeds the trajectory horizon");
  }

  auto metric = [&](std::size_t step) {
    double v = 0.0;
    for (int i = 0; i < traj.n; ++i) {
      if (channel != ErrorChannel::Velocity) v = std::max(v, std::abs(traj.at(traj.e, step, i)));
      if (channel != ErrorChannel::Position) v = std::max(v, std::abs(traj.at(traj.z, step, i)));
    }
    return v;
  };

  std::size_t need = 1;
  if (window > 0.0) {
    if (m < 2) return std::nullopt;
    const double spacing = traj.t[1] - traj.t[0];
    need = static_cast<std::size_t>(std::ceil(window / spacing - 1e-9)) + 1;
  }

  // longest run of below-tolerance samples ending at the horizon side
  std::size_t run = 0;
  std::optional<double> best;
  for (std::size_t idx = m; idx-- > 0;) {
    if (metric(idx) < tol) {
      ++run;
      if (run >= need && traj.t[idx] + window <= horizon + 1e-9) {
        best = traj.t[idx];
      }
    } else {
      run = 0;
    }
  }
  return best;
}

DirectedGraph surrogate_topology() {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  // directed ring 1 -> 2 -> 3 -> 4 -> 1 (receiver row, sender column)
  a(1, 0) = 1.0;
  a(2, 1) = 1.0;
  a(3, 2) = 1.0;
  a(0, 3) = 1.0;
  Eigen::VectorXd b(4);
  b << 1.0, 0.0, 0.0, 0.0;
  return build_graph(std::move(a), std::move(b));
}

ScenarioConfig scenario_vi_a() {
  using W = LeaderSignal::Waveform;
  ScenarioConfig c;
  c.id = "vi-a";
  c.mode = Mode::DfdR;
  c.graph = surrogate_topology();
  c.gains.k1 = 5.0;
  c.gains.k2 = 4.0;
  c.gains.rho = 0.75;
  c.leader = LeaderSignal({{W::Sin, 1.0, 1.0}});
  c.l = 1.0;
  c.disturbances = {
      LeaderSignal({{W::Sin, -0.25, 0.5}}),
      LeaderSignal({{W::Cos, -0.25, 0.5}}),
      LeaderSignal({{W::Cos, -1.21, 1.1}}),
      LeaderSignal({{W::Sin, -0.64, 0.8}}),
  };
  c.l1 = 1.21;
  Eigen::VectorXd x0(4);
  x0 << 0.0, 1.0, 1.0, 0.0;
  c.x0 = x0;
  // follower initial velocities default to zero
  return c;
}

ScenarioConfig scenario_vi_b() {
  using W = LeaderSignal::Waveform;
  ScenarioConfig c;
  c.id = "vi-b";
  c.mode = Mode::DfdA;
  c.graph = surrogate_topology();
  c.gains.k1 = 5.0;
  c.gains.k2 = 4.0;
  c.gains.rho = 0.75;
  c.leader = LeaderSignal({{W::Sin, 0.6, 1.0}, {W::Cos, 0.25, 2.0}});
  c.l = 3.0;  // conservative: the certified bound is 1.6
  c.l1 = 0.0;
  return c;
}

ScenarioConfig scenario_vi_c() {
  using W = LeaderSignal::Waveform;
  ScenarioConfig c;
  c.id = "vi-c";
  c.mode = Mode::Controller;
  c.graph = surrogate_topology();
  c.gains.k1 = 8.0;
  c.gains.k2 = 6.0;
  c.gains.rho = 0.75;
  c.leader = LeaderSignal({{W::Cos, 1.0, 1.0}, {W::Cos, 0.2, 0.2}});  // a0(t)
  c.disturbances = {
      LeaderSignal({{W::Sin, 1.0, 1.5}}),
      LeaderSignal({{W::Cos, 2.0, 1.0}}),
      LeaderSignal({{W::Cos, 1.0, 1.5}}),
      LeaderSignal({{W::Sin, 1.0, 0.5}}),
  };
  c.l = 3.1;  // bound on the rate difference between follower and leader drifts
  c.l1 = 0.0;
  Eigen::VectorXd s_init(4);
  s_init << 1.0, 1.5, -1.0, 2.0;
  c.x0 = s_init;
  c.s0_init = -1.0;
  c.input_gain = Eigen::VectorXd::Ones(4);
  return c;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::DfdR: return "dfd_r";
    case Mode::DfdA: return "dfd_a";
    case Mode::Controller: return "controller";
    case Mode::ErrorSystem: return "error_system";
  }
  return "unknown";
}

}  // namespace dfd
