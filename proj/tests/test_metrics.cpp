#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "boomforce/errors.hpp"
#include "boomforce/metrics.hpp"

using namespace boomforce;
using std::numbers::pi;

namespace {

Trace constant_trace(double f_n, int n, double dt = 0.002) {
  Trace tr;
  for (int i = 0; i < n; ++i) {
    TraceSample s;
    s.t = i * dt;
    s.f_n = f_n;
    tr.push_back(s);
  }
  return tr;
}

std::vector<TimedValue> sample(auto&& fn, double duration, double dt, double t0 = 0.0) {
  std::vector<TimedValue> out;
  for (int i = 0; i * dt <= duration + 1e-12; ++i) out.push_back({t0 + i * dt, fn(i * dt)});
  return out;
}

// Jury conditions for z^2 - tr z + det with x = omega dt:
// det = 1 - 2 eta x, tr = det + 1 - x^2.
double analytic_bound(double omega, double eta) {
  return std::min(1.0 / eta, 2.0 * (std::sqrt(eta * eta + 1.0) - eta)) / omega;
}

}  // namespace

TEST_CASE("rms force error") {
  CHECK(rms_force_error(constant_trace(-2.2, 100), -2.0, 0.0) == doctest::Approx(0.2));
  CHECK(rms_force_error(constant_trace(-2.0, 100), -2.0, 0.0) == 0.0);

  Trace tr = constant_trace(0.0, 100);
  for (std::size_t i = 50; i < tr.size(); ++i) tr[i].f_n = -2.5;
  CHECK(rms_force_error(tr, -2.0, tr[50].t) == doctest::Approx(0.5));

  try {
    rms_force_error(tr, -2.0, 10.0);
    FAIL("expected EmptyWindow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyWindow);
  }
}

TEST_CASE("rms of a sinusoidal error is A / sqrt(2)") {
  const double amplitude = 0.3;
  for (int per_period : {100, 250, 1000}) {
    Trace tr;
    const int periods = 7;
    for (int i = 0; i < per_period * periods; ++i) {
      TraceSample s;
      s.t = i * 1e-3;
      s.f_n = -2.0 + amplitude * std::sin(2.0 * pi * i / per_period + 0.3);
      tr.push_back(s);
    }
    CHECK(rms_force_error(tr, -2.0, 0.0) ==
          doctest::Approx(amplitude / std::sqrt(2.0)).epsilon(0.01));
  }
}

TEST_CASE("fit recovers a clean critically damped transient") {
  const auto sig = sample([](double t) { return (1.0 + 10.0 * t) * std::exp(-10.0 * t); }, 1.0,
                          0.002, 3.0);
  const SecondOrderFit fit = fit_second_order(sig);
  CHECK(fit.omega_n >= 9.0);
  CHECK(fit.omega_n <= 11.0);
  CHECK(fit.eta >= 0.85);
  CHECK(fit.eta <= 1.15);
  CHECK(fit.good);
}

TEST_CASE("fit recovers an underdamped transient and its overshoot ratio") {
  const double omega = 8.0;
  const double eta = 0.5;
  const double wd = omega * std::sqrt(1.0 - eta * eta);
  auto response = [&](double t) {
    return std::exp(-eta * omega * t) *
           (std::cos(wd * t) + eta / std::sqrt(1.0 - eta * eta) * std::sin(wd * t));
  };
  const SecondOrderFit fit = fit_second_order(sample(response, 2.0, 0.002));
  const auto overshoot = [](double z) { return std::exp(-pi * z / std::sqrt(1.0 - z * z)); };
  CHECK(overshoot(fit.eta) == doctest::Approx(overshoot(eta)).epsilon(0.10));
  CHECK(fit.omega_n == doctest::Approx(omega).epsilon(0.10));
  CHECK(fit.method == "log_decrement");
}

TEST_CASE("fit handles overdamped and noisy transients") {
  SUBCASE("overdamped") {
    const double omega = 10.0;
    const double eta = 1.6;
    const double s1 = -omega * (eta - std::sqrt(eta * eta - 1));
    const double s2 = -omega * (eta + std::sqrt(eta * eta - 1));
    auto e = [&](double t) { return (s2 * std::exp(s1 * t) - s1 * std::exp(s2 * t)) / (s2 - s1); };
    const SecondOrderFit fit = fit_second_order(sample(e, 2.0, 0.002));
    CHECK(fit.omega_n == doctest::Approx(omega).epsilon(0.10));
    CHECK(fit.eta == doctest::Approx(eta).epsilon(0.15));
  }
  SUBCASE("critically damped with sensor noise") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> noise(0.0, 0.02);
    auto e = [&](double t) { return -2.0 * (1.0 + 10.0 * t) * std::exp(-10.0 * t) + noise(rng); };
    const SecondOrderFit fit = fit_second_order(sample(e, 0.8, 0.002));
    CHECK(fit.omega_n == doctest::Approx(10.0).epsilon(0.10));
    CHECK(fit.eta == doctest::Approx(1.0).epsilon(0.15));
  }
}

TEST_CASE("fit rejects signals without a transient") {
  auto expect_fit_failed = [](const std::vector<TimedValue>& sig) {
    try {
      fit_second_order(sig);
      FAIL("expected FitFailed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kFitFailed);
    }
  };
  expect_fit_failed(sample([](double) { return 0.0; }, 1.0, 0.002));
  expect_fit_failed(sample([](double t) { return std::exp(-10 * t); }, 0.01, 0.002));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  expect_fit_failed(sample([&](double) { return noise(rng); }, 1.0, 0.002));
}

TEST_CASE("fit over a trace window uses e = f_des - f_n") {
  Trace tr;
  for (int i = 0; i < 1000; ++i) {
    TraceSample s;
    s.t = i * 0.002;
    const double tau = s.t - 0.5;
    s.f_n = tau < 0 ? 0.0 : -2.0 + 2.0 * (1.0 + 10.0 * tau) * std::exp(-10.0 * tau);
    tr.push_back(s);
  }
  const SecondOrderFit fit = fit_second_order(tr, -2.0, {0.5, 1.5});
  CHECK(fit.omega_n == doctest::Approx(10.0).epsilon(0.05));
  CHECK(fit.eta == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("update matrix matches the hand-derived closed loop") {
  const AdmittanceGains g = schedule_gains({10, 1, 1}, 50);
  const double dt = 0.002;
  const Matrix2 m = admittance_update_matrix(g, 50, dt);

  // One tick of the sampled loop computed directly.
  const double v0 = 0.01;
  const double p0 = -0.003;
  const double v1 = admittance_step(g, v0, 50 * p0, 0.0, dt);
  const double p1 = p0 + dt * v1;
  const Eigen::Vector2d next = m * Eigen::Vector2d(v0, p0);
  CHECK(next[0] == doctest::Approx(v1).epsilon(1e-12));
  CHECK(next[1] == doctest::Approx(p1).epsilon(1e-12));
}

TEST_CASE("spectral radius agrees with an eigen solver") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    Matrix2 m;
    m << u(rng), u(rng), u(rng), u(rng);
    const double expected = Eigen::EigenSolver<Matrix2>(m).eigenvalues().cwiseAbs().maxCoeff();
    CHECK(spectral_radius(m) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("stability bound") {
  const AdmittanceSpec spec{10, 1, 1};
  const StabilityBound b = stability_bound(spec, 50);
  CHECK(b.max_stable_dt > 0.002 * 10);
  CHECK(b.max_stable_dt <= 2.0 * spec.mass / (2 * spec.eta * spec.omega_n * spec.mass));
  CHECK_FALSE(b.unstable_at_min);
  CHECK(std::abs(b.max_stable_dt - analytic_bound(10, 1)) <= b.resolution);

  // Scheduling makes the bound independent of stiffness.
  for (double k : {10.0, 200.0, 5000.0}) {
    CHECK(std::abs(stability_bound(spec, k).max_stable_dt - b.max_stable_dt) <= b.resolution);
  }
  for (const AdmittanceSpec s : {AdmittanceSpec{5, 0.5, 2}, AdmittanceSpec{20, 2, 1}}) {
    CHECK(std::abs(stability_bound(s, 100).max_stable_dt - analytic_bound(s.omega_n, s.eta)) <=
          stability_bound(s, 100).resolution);
  }

  const StabilityBound tight = stability_bound({1000, 1, 1}, 50, {0.01, 0.5, 100});
  CHECK(tight.unstable_at_min);
  CHECK(tight.max_stable_dt == 0.01);
}
