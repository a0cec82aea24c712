#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dfd/differentiator.hpp"
#include "dfd/lyapunov.hpp"
#include "dfd/sim.hpp"
#include "dfd/testing/random_graph.hpp"
#include "support/oracles.hpp"

using dfd::certify_decrease;
using dfd::ErrorState;
using dfd::GainSet;
using dfd::make_error_state;
using dfd::signed_power;
using dfd::v1_closed_form;
using dfd::v2;
using dfd::v_total;

namespace {

GainSet paper_gains(double k1, double k2) {
  const auto c = dfd::derived_constants(0.75, Eigen::VectorXd::Ones(4), 3.0, 0.0);
  return dfd::make_gain_set(k1, k2, c);
}

/// Quadrature of the defining integral sum_i w_i int_{<v_i>^2}^{y_i}
/// (<s>^(1/2) - v_i) ds, independent of the closed form.
double v1_by_quadrature(const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                        const Eigen::VectorXd& w) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double vi = v(i);
    const double lower = signed_power(vi, 2.0);
    total += w(i) * oracles::integrate(
                        [vi](double s) { return signed_power(s, 0.5) - vi; }, lower, y(i));
  }
  return total;
}

}  // namespace

TEST_CASE("v1 vanishes exactly when the integral interval is empty") {
  Eigen::VectorXd v(3);
  v << 0.7, -1.3, 0.0;
  Eigen::VectorXd y(3);
  for (int i = 0; i < 3; ++i) y(i) = signed_power(v(i), 2.0);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  CHECK(v1_closed_form(y, v, w) == 0.0);
}

TEST_CASE("v1 at v = 0 is the plain integral of the square root") {
  Eigen::VectorXd y(3);
  y << 1.0, -4.0, 0.25;
  Eigen::VectorXd w(3);
  w << 0.5, 1.0, 2.0;
  const double expected = 0.5 * (2.0 / 3.0) * 1.0 + 1.0 * (2.0 / 3.0) * 8.0 +
                          2.0 * (2.0 / 3.0) * 0.125;
  CHECK(v1_closed_form(y, Eigen::VectorXd::Zero(3), w) == doctest::Approx(expected));
}

TEST_CASE("v1 closed form matches quadrature of the defining integral") {
  dfd::testing::Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 5;
    Eigen::VectorXd y(n), v(n), w(n);
    for (int i = 0; i < n; ++i) {
      y(i) = rng.uniform(-3.0, 3.0);
      v(i) = rng.uniform(-2.0, 2.0);
      w(i) = rng.uniform(0.05, 1.0);
    }
    const double closed = v1_closed_form(y, v, w);
    const double quad = v1_by_quadrature(y, v, w);
    CHECK(std::abs(closed - quad) <= 1e-9 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("v1 is nonnegative, zero only on the interval-collapse manifold") {
  dfd::testing::Rng rng(29);
  for (int trial = 0; trial < 2000; ++trial) {
    Eigen::VectorXd y(4), v(4), w(4);
    for (int i = 0; i < 4; ++i) {
      y(i) = rng.uniform(-5.0, 5.0);
      v(i) = rng.uniform(-3.0, 3.0);
      w(i) = rng.uniform(0.05, 1.0);
    }
    CHECK(v1_closed_form(y, v, w) >= 0.0);
  }

  Eigen::VectorXd v(2);
  v << 0.8, -0.6;
  Eigen::VectorXd y(2);
  for (int i = 0; i < 2; ++i) y(i) = signed_power(v(i), 2.0);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
  CHECK(v1_closed_form(y, v, w) == 0.0);
  y(0) += 1e-3;
  CHECK(v1_closed_form(y, v, w) > 0.0);
}

TEST_CASE("v2 hand values") {
  CHECK(v2(Eigen::VectorXd::Zero(3)) == 0.0);
  Eigen::VectorXd a(2);
  a << 1.0, -1.0;
  CHECK(v2(a) == doctest::Approx(2.0 / 3.0));
  Eigen::VectorXd b(3);
  b << 0.5, 0.0, -2.0;
  CHECK(v2(b) == doctest::Approx((0.125 + 8.0) / 3.0));
}

TEST_CASE("v_total on the bundled absolute-estimation scenario start state") {
  const auto cfg = dfd::scenario_vi_b();
  const auto prep = dfd::prepare(cfg);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
  // p_hat(0) = q_hat(0) = 0, f(0) = 0.25, f'(0) = 0.6
  const Eigen::VectorXd e0 = -0.25 * ones;
  const Eigen::VectorXd z0 = -0.6 * ones;
  const auto st = make_error_state(e0, z0, prep.cert.laplacian + prep.cert.pinning);
  const auto sample = v_total(st, prep.gains, prep.cert);

  // hand expansion: y = B e = [-0.25, 0, 0, 0], v = z / k1 = -0.12
  const double av = 0.12;
  const double term1 = (2.0 / 3.0) * std::pow(0.25, 1.5) - (-0.12) * (-0.25) + av * av * av / 3.0;
  const double v1_expected = term1 + 3.0 * (av * av * av / 3.0);
  const double v2_expected = 4.0 * av * av * av / 3.0;
  CHECK(sample.V1 == doctest::Approx(v1_expected).epsilon(1e-12));
  CHECK(sample.V2 == doctest::Approx(v2_expected).epsilon(1e-12));
  CHECK(sample.V == doctest::Approx(v1_expected + 25.0 * v2_expected).epsilon(1e-12));
}

TEST_CASE("v_total is zero at the origin and radially increasing") {
  const auto cfg = dfd::scenario_vi_b();
  const auto prep = dfd::prepare(cfg);
  const Eigen::MatrixXd m = prep.cert.laplacian + prep.cert.pinning;

  const auto origin = make_error_state(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), m);
  CHECK(v_total(origin, prep.gains, prep.cert).V == 0.0);

  dfd::testing::Rng rng(31);
  Eigen::VectorXd e(4), z(4);
  for (int i = 0; i < 4; ++i) {
    e(i) = rng.uniform(-1.0, 1.0);
    z(i) = rng.uniform(-1.0, 1.0);
  }
  double prev = 0.0;
  for (double lambda : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const auto st = make_error_state(lambda * e, lambda * z, m);
    const double val = v_total(st, prep.gains, prep.cert).V;
    CHECK(val > prev);
    prev = val;
  }
}

TEST_CASE("v_total rejects an inconsistent innovation") {
  const auto cfg = dfd::scenario_vi_b();
  const auto prep = dfd::prepare(cfg);
  ErrorState st = make_error_state(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4),
                                   prep.cert.laplacian + prep.cert.pinning);
  st.y(2) += 0.5;
  CHECK_THROWS_AS(v_total(st, prep.gains, prep.cert), std::invalid_argument);
}

TEST_CASE("the two-case scalar bound holds around the tricky regions") {
  dfd::testing::Rng rng(37);
  for (int trial = 0; trial < 5000; ++trial) {
    const double y = rng.uniform(-2.0, 2.0) * std::pow(10.0, rng.uniform(-4.0, 1.0));
    const double v = rng.uniform(-2.0, 2.0) * std::pow(10.0, rng.uniform(-4.0, 1.0));
    const double lhs = v * v * std::abs(signed_power(y, 0.0) - signed_power(v, 0.0));
    const double diff = v - signed_power(y, 0.5);
    CHECK(lhs <= 2.0 * diff * diff * (1.0 + 1e-12) + 1e-300);
  }
}

TEST_CASE("decrease certification of a resting trajectory reports nothing") {
  dfd::ErrorSystemConfig cfg;
  cfg.graph = dfd::surrogate_topology();
  cfg.gains = paper_gains(5.0, 4.0);
  cfg.e0 = Eigen::VectorXd::Zero(4);
  cfg.z0 = Eigen::VectorXd::Zero(4);
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  const auto traj = dfd::integrate_error_system(cfg);
  const auto report = certify_decrease(traj, cfg.gains);
  CHECK(report.violations == 0);
  CHECK(report.samples_checked == 0);  // everything below the floor
  CHECK(report.slack == doctest::Approx(10.0 * 1e-3 * (25.0 + 4.0)));
}

TEST_CASE("decrease certification needs at least three samples") {
  dfd::Trajectory traj;
  traj.dt = 1e-3;
  traj.lyap_t = {0.0, 1e-3};
  traj.lyap_v = {1.0, 0.9};
  CHECK_THROWS_AS(certify_decrease(traj, paper_gains(5.0, 4.0)), std::invalid_argument);
}
