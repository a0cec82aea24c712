#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "dfd/lyapunov.hpp"
#include "dfd/sim.hpp"

using dfd::convergence_time;
using dfd::ErrorChannel;
using dfd::integrate;
using dfd::integrate_error_system;
using dfd::LeaderSignal;
using dfd::Mode;
using dfd::prepare;
using dfd::ScenarioConfig;
using dfd::Trajectory;

namespace {

double innovation_identity_residual(const Trajectory& traj, const Eigen::MatrixXd& coupling) {
  double worst = 0.0;
  for (std::size_t s = 0; s < traj.steps(); ++s) {
    Eigen::VectorXd e(traj.n), y(traj.n);
    for (int i = 0; i < traj.n; ++i) {
      e(i) = traj.at(traj.e, s, i);
      y(i) = traj.at(traj.y, s, i);
    }
    const Eigen::VectorXd expected = coupling * e;
    const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
    worst = std::max(worst, (y - expected).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("zero leader, zero error: the origin is an exact fixed point") {
  ScenarioConfig cfg = dfd::scenario_vi_b();
  cfg.leader = LeaderSignal();  // identically zero
  cfg.l = 0.0;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  const auto traj = integrate(cfg);
  REQUIRE(traj.steps() > 10);
  for (double v : traj.p_hat) CHECK(v == 0.0);
  for (double v : traj.q_hat) CHECK(v == 0.0);
  for (double v : traj.e) CHECK(v == 0.0);
  for (double v : traj.lyap_v) CHECK(v == 0.0);
}

TEST_CASE("identical configs give bit-identical trajectories") {
  ScenarioConfig cfg = dfd::scenario_vi_b();
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  const auto a = integrate(cfg);
  const auto b = integrate(cfg);
  CHECK(a.t == b.t);
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.q_hat == b.q_hat);
  CHECK(a.y == b.y);
  CHECK(a.e == b.e);
  CHECK(a.z == b.z);
  CHECK(a.lyap_v == b.lyap_v);
}

TEST_CASE("innovation identity holds at every recorded step") {
  ScenarioConfig cfg = dfd::scenario_vi_b();
  cfg.dt = 1e-3;
  cfg.t_end = 2.0;
  const auto prep = prepare(cfg);
  const auto traj = integrate(cfg, prep);
  CHECK(innovation_identity_residual(traj, prep.cert.laplacian + prep.cert.pinning) < 1e-10);

  ScenarioConfig rel = dfd::scenario_vi_a();
  rel.dt = 1e-3;
  rel.t_end = 2.0;
  const auto prep_rel = prepare(rel);
  const auto traj_rel = integrate(rel, prep_rel);
  CHECK(innovation_identity_residual(traj_rel, prep_rel.cert.laplacian + prep_rel.cert.pinning) <
        1e-10);
}

TEST_CASE("bundled scenario values") {
  const auto a = dfd::scenario_vi_a();
  CHECK(a.mode == Mode::DfdR);
  CHECK(*a.gains.k1 == 5.0);
  CHECK(*a.gains.k2 == 4.0);
  CHECK(a.l1 == 1.21);
  Eigen::VectorXd x0(4);
  x0 << 0.0, 1.0, 1.0, 0.0;
  CHECK(a.x0 == x0);
  CHECK(a.disturbances.size() == 4);
  CHECK(a.disturbances[2].value(0.0) == doctest::Approx(-1.21));

  const auto b = dfd::scenario_vi_b();
  CHECK(b.mode == Mode::DfdA);
  CHECK(b.leader.value(0.0) == doctest::Approx(0.25));
  CHECK(b.leader.rate(0.0) == doctest::Approx(0.6));
  CHECK(b.leader.acceleration_bound() == doctest::Approx(1.6));
  CHECK(b.leader.acceleration_bound() <= b.l);

  const auto c = dfd::scenario_vi_c();
  CHECK(c.mode == Mode::Controller);
  CHECK(*c.gains.k1 == 8.0);
  CHECK(*c.gains.k2 == 6.0);
  Eigen::VectorXd s_init(4);
  s_init << 1.0, 1.5, -1.0, 2.0;
  CHECK(c.x0 == s_init);
  CHECK(c.s0_init == -1.0);
  CHECK(c.leader.value(0.0) == doctest::Approx(1.2));  // a0(0)
}

TEST_CASE("prepare resolves auto gains to the minimal certified pair") {
  ScenarioConfig cfg = dfd::scenario_vi_b();
  cfg.gains.k1.reset();
  cfg.gains.k2.reset();
  const auto prep = prepare(cfg);
  CHECK(prep.gains.k2 == doctest::Approx(4.0));  // l2 / rho = 3 / 0.75
  REQUIRE(prep.gain_check.has_value());
  CHECK(prep.gain_check->certified());
  CHECK(prep.gain_check->k1_margin == 0.0);
  CHECK(prep.gain_check->k2_margin == 0.0);
}

TEST_CASE("prepare validates the configuration") {
  ScenarioConfig cfg = dfd::scenario_vi_b();
  cfg.gains.rho = 1.5;
  CHECK_THROWS_AS(prepare(cfg), dfd::ConfigError);

  cfg = dfd::scenario_vi_b();
  cfg.dt = -1.0;
  CHECK_THROWS_AS(prepare(cfg), dfd::ConfigError);

  cfg = dfd::scenario_vi_b();
  cfg.disturbances.resize(2);
  CHECK_THROWS_AS(prepare(cfg), dfd::ConfigError);

  cfg = dfd::scenario_vi_b();
  cfg.gains.k1 = -5.0;
  CHECK_THROWS_AS(prepare(cfg), dfd::ConfigError);

  // Assumption 1 violated surfaces as AssumptionError
  cfg = dfd::scenario_vi_b();
  cfg.graph.leader_links.setZero();
  CHECK_THROWS_AS(prepare(cfg), dfd::AssumptionError);
}

TEST_CASE("convergence time on hand-built trajectories") {
  Trajectory traj;
  traj.mode = Mode::ErrorSystem;
  traj.n = 1;
  traj.dt = 0.1;
  const int m = 101;
  for (int s = 0; s < m; ++s) {
    traj.t.push_back(0.1 * s);
    const double err = (s < 40) ? 1.0 : 0.0;
    traj.e.push_back(err);
    traj.z.push_back(0.0);
  }

  const auto t_star = convergence_time(traj, ErrorChannel::Both, 1e-2, 1.0);
  REQUIRE(t_star.has_value());
  CHECK(*t_star == doctest::Approx(4.0));

  // identically zero from the start
  std::fill(traj.e.begin(), traj.e.end(), 0.0);
  CHECK(*convergence_time(traj, ErrorChannel::Both, 1e-2, 1.0) == 0.0);

  // never below tolerance
  std::fill(traj.e.begin(), traj.e.end(), 1.0);
  CHECK_FALSE(convergence_time(traj, ErrorChannel::Position, 1e-2, 1.0).has_value());
  // the z channel alone is still quiet
  CHECK(convergence_time(traj, ErrorChannel::Velocity, 1e-2, 1.0).has_value());

  CHECK_THROWS_AS(convergence_time(traj, ErrorChannel::Both, 1e-2, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(convergence_time(traj, ErrorChannel::Both, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("window must fit inside the horizon for a hit near the end") {
  Trajectory traj;
  traj.mode = Mode::ErrorSystem;
  traj.n = 1;
  traj.dt = 0.1;
  for (int s = 0; s <= 20; ++s) {
    traj.t.push_back(0.1 * s);
    traj.e.push_back(s >= 15 ? 0.0 : 1.0);
    traj.z.push_back(0.0);
  }
  // quiet only on [1.5, 2.0]: too short for a 1 s window
  CHECK_FALSE(convergence_time(traj, ErrorChannel::Both, 1e-2, 1.0).has_value());
  CHECK(convergence_time(traj, ErrorChannel::Both, 1e-2, 0.5).has_value());
}

TEST_CASE("full absolute-estimation run matches the error-system oracle (coarse)") {
  ScenarioConfig cfg = dfd::scenario_vi_b();
  cfg.dt = 1e-3;
  cfg.t_end = 3.0;
  const auto prep = prepare(cfg);
  const auto full = integrate(cfg, prep);

  dfd::ErrorSystemConfig err;
  err.graph = cfg.graph;
  err.gains = prep.gains;
  err.e0 = Eigen::VectorXd::Constant(4, -cfg.leader.value(0.0));
  err.z0 = Eigen::VectorXd::Constant(4, -cfg.leader.rate(0.0));
  // d = -f''
  err.disturbances.assign(4, LeaderSignal({{LeaderSignal::Waveform::Sin, 0.6, 1.0},
                                           {LeaderSignal::Waveform::Cos, 1.0, 2.0}}));
  err.dt = cfg.dt;
  err.t_end = cfg.t_end;
  err.decimate = cfg.decimate;
  const auto oracle = integrate_error_system(err);

  REQUIRE(full.steps() == oracle.steps());
  double scale = 0.0;
  for (std::size_t s = 0; s < full.steps(); ++s) {
    for (int i = 0; i < 4; ++i) {
      scale = std::max({scale, std::abs(full.at(full.e, s, i)), std::abs(full.at(full.z, s, i))});
    }
  }
  const double tol = 10.0 * cfg.dt * scale;
  for (std::size_t s = 0; s < full.steps(); ++s) {
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(full.at(full.e, s, i) - oracle.at(oracle.e, s, i)) <= tol);
      CHECK(std::abs(full.at(full.z, s, i) - oracle.at(oracle.z, s, i)) <= tol);
    }
  }
}

TEST_CASE("post-convergence chattering band shrinks with the step size") {
  auto band = [](double dt) {
    ScenarioConfig cfg = dfd::scenario_vi_b();
    cfg.dt = dt;
    cfg.t_end = 6.0;
    cfg.decimate = 1;
    const auto traj = integrate(cfg);
    double worst = 0.0;
    for (std::size_t s = 0; s < traj.steps(); ++s) {
      if (traj.t[s] < 3.0) continue;
      for (int i = 0; i < traj.n; ++i) {
        worst = std::max(worst, std::abs(traj.at(traj.z, s, i)));
      }
    }
    return worst;
  };
  const double coarse = band(2e-3);
  const double fine = band(1e-3);
  CHECK(fine < coarse);
  CHECK(coarse / fine > 1.3);
}

TEST_CASE("divergence is detected and the valid prefix kept") {
  ScenarioConfig cfg = dfd::scenario_vi_a();
  cfg.disturbances.assign(4, LeaderSignal::constant(1e5));
  cfg.l1 = 1e5;
  cfg.dt = 1e-3;
  cfg.t_end = 5.0;
  cfg.divergence_threshold = 1e4;
  const auto traj = integrate(cfg);
  REQUIRE(traj.diverged_at.has_value());
  CHECK(*traj.diverged_at < 1.0);  // x grows like 5e4 t^2
  CHECK(traj.t.back() <= *traj.diverged_at + 1e-12);
  for (double v : traj.x) CHECK(std::isfinite(v));
}

TEST_CASE("disturbance-bound excursions are counted, not fatal") {
  ScenarioConfig cfg = dfd::scenario_vi_a();
  cfg.l1 = 0.01;  // far below the actual disturbance amplitudes
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  const auto traj = integrate(cfg);
  CHECK_FALSE(traj.diverged_at.has_value());
  CHECK(traj.disturbance_bound_violations > 0);
}

TEST_CASE("error-system integration rests at the origin") {
  dfd::ErrorSystemConfig cfg;
  cfg.graph = dfd::surrogate_topology();
  cfg.gains = prepare(dfd::scenario_vi_b()).gains;
  cfg.e0 = Eigen::VectorXd::Zero(4);
  cfg.z0 = Eigen::VectorXd::Zero(4);
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  const auto traj = integrate_error_system(cfg);
  for (double v : traj.e) CHECK(v == 0.0);
  for (double v : traj.z) CHECK(v == 0.0);
  for (double v : traj.lyap_v) CHECK(v == 0.0);
}
