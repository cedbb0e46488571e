#include "boomforce/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "boomforce/errors.hpp"
#include "boomforce/metrics.hpp"
#include "boomforce/serialize.hpp"

namespace boomforce {
namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

CheckResult jacobian_fd() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> theta(0.3, 2.8);
  std::uniform_real_distribution<double> d2(0.3, 1.0);
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const JointState q{theta(rng), d2(rng)};
    Matrix2 fd;
    for (int col = 0; col < 2; ++col) {
      JointState plus = q;
      JointState minus = q;
      (col == 0 ? plus.theta1 : plus.d2) += h;
      (col == 0 ? minus.theta1 : minus.d2) -= h;
      const EndpointState a = forward_kinematics(plus);
      const EndpointState b = forward_kinematics(minus);
      fd(0, col) = (a.x - b.x) / (2.0 * h);
      fd(1, col) = (a.y - b.y) / (2.0 * h);
    }
    const Matrix2 j = jacobian(q);
    worst = std::max(worst, (fd - j).cwiseAbs().maxCoeff() / j.cwiseAbs().maxCoeff());
  }
  return {"jacobian_fd", worst < 1e-6, "max relative error " + fmt(worst)};
}

CheckResult det_identity() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> theta(0.3, 2.8);
  std::uniform_real_distribution<double> d2(0.3, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const JointState q{theta(rng), d2(rng)};
    worst = std::max(worst, std::abs(jacobian(q).determinant() + q.d2));
  }
  return {"det_identity", worst <= 1e-12, "max |det J + d2| " + fmt(worst)};
}

CheckResult stiffness_probe() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> theta(0.3, 2.8);
  std::uniform_real_distribution<double> d2(0.3, 1.0);
  std::uniform_real_distribution<double> k_theta(10.0, 200.0);
  const double contact[] = {500.0, 5000.0, kRigid};
  constexpr double push = 1e-4;  // m into the wall

  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const JointState q{theta(rng), d2(rng)};
    const StiffnessModel model{k_theta(rng), contact[i % 3]};
    WorldModel world;
    world.wall_x = forward_kinematics(q).x;
    world.noise_sigma = 0.0;
    world.mu_s = world.mu_k = world.stiction_coupling = 0.0;

    // Displace the joints so the tip moves `push` along +x.
    const Eigen::Vector2d dq = jacobian(q).inverse() * Eigen::Vector2d(push, 0.0);
    PlantState state = PlantState::initial({q.theta1 + dq[0], q.d2 + dq[1]}, 0);
    RobotParams robot;
    robot.theta1_min = 1e-3;
    robot.theta1_max = std::numbers::pi - 1e-3;
    robot.d2_min = 0.01;
    const StepResult step = plant_step(state, {}, world, model, robot, 5e-4);
    const double p = wall_clearance(step.state.q_nominal, world);
    const double probed = step.reading.f_n / p;
    worst = std::max(worst, std::abs(probed / equivalent_stiffness(model, q) - 1.0));
  }
  return {"stiffness_probe", worst < 0.01, "max relative deviation " + fmt(worst)};
}

CheckResult equilibrium_invariance(const VerifyOptions& options) {
  double worst = 0.0;
  bool any_diverged = false;
  for (int i = 0; i < 10; ++i) {
    const double k = 10.0 * std::pow(500.0, i / 9.0);
    ScenarioConfig c = stiffness_probe_scenario(k);
    c.fault = options.fault;
    const ScenarioResult r = run_scenario(c);
    any_diverged = any_diverged || r.summary.diverged;
    worst = std::max(worst, r.summary.final_force_error);
  }
  return {"equilibrium_invariance", !any_diverged && worst < 1e-3,
          "max |f_n - f_des| " + fmt(worst) + (any_diverged ? " (diverged)" : "")};
}

CheckResult scheduled_dynamics(const VerifyOptions& options) {
  double worst_omega = 0.0;
  double worst_eta = 0.0;
  std::string failure;
  for (double eta : {0.5, 1.0}) {
    for (double k : {20.0, 50.0, 100.0, 500.0}) {
      ScenarioConfig c = stiffness_probe_scenario(k, eta);
      c.fault = options.fault;
      const ScenarioResult r = run_scenario(c);
      if (!r.summary.t_contact) {
        failure = "no contact at k_eq " + fmt(k);
        continue;
      }
      const double t0 = *r.summary.t_contact;
      try {
        const SecondOrderFit fit =
            fit_second_order(r.trace, c.setpoint.f_des, {t0, t0 + 1.5});
        worst_omega = std::max(worst_omega, std::abs(fit.omega_n / c.spec.omega_n - 1.0));
        worst_eta = std::max(worst_eta, std::abs(fit.eta / eta - 1.0));
      } catch (const Error& e) {
        failure = e.what();
      }
    }
  }
  const bool ok = failure.empty() && worst_omega < 0.10 && worst_eta < 0.15;
  return {"scheduled_dynamics", ok,
          failure.empty() ? "omega_n err " + fmt(worst_omega) + ", eta err " + fmt(worst_eta)
                          : failure};
}

CheckResult determinism(const VerifyOptions& options) {
  ScenarioConfig c;
  c.fault = options.fault;
  std::ostringstream a;
  std::ostringstream b;
  write_trace_csv(a, run_scenario(c).trace);
  write_trace_csv(b, run_scenario(c).trace);
  return {"determinism", a.str() == b.str(), std::to_string(a.str().size()) + " bytes"};
}

CheckResult stability_cross_check(const VerifyOptions& options) {
  ScenarioConfig base;
  base.toggles.noise = false;
  base.toggles.stiction = false;
  base.fault = options.fault;
  const double k_eq = equivalent_stiffness(base.stiffness, base.q0);
  const double bound = stability_bound(base.spec, k_eq).max_stable_dt;

  auto run_at = [&](double factor) {
    ScenarioConfig c = base;
    const double plant = c.timing.dt_plant;
    c.timing.dt_force = std::max(1.0, std::round(factor * bound / plant)) * plant;
    c.timing.dt_traj = std::max(c.timing.dt_traj, c.timing.dt_force);
    return run_scenario(c).summary;
  };
  const RunSummary slow = run_at(1.5);
  const RunSummary fast = run_at(0.5);
  const bool ok = bound > 0.002 && slow.diverged && !fast.diverged &&
                  fast.final_force_error < 1e-3;
  return {"stability_cross_check", ok,
          "bound " + fmt(bound) + " s; 1.5x diverged=" + (slow.diverged ? "yes" : "no") +
              "; 0.5x final error " + fmt(fast.final_force_error)};
}

}  // namespace

ScenarioConfig stiffness_probe_scenario(double k_eq, double eta) {
  constexpr double tip_height = 0.5;
  constexpr double wall = 0.3;
  constexpr double standoff = 0.01;
  ScenarioConfig c;
  c.stiffness = {k_eq * tip_height * tip_height, kRigid};
  c.world.wall_x = wall;
  c.spec.eta = eta;
  c.q0 = {std::atan2(tip_height, wall - standoff), std::hypot(wall - standoff, tip_height)};
  c.setpoint.sweep_distance = 0.0;
  c.setpoint.y_traj = Trajectory::sweep(c.setpoint.v_sweep, 0.0);
  c.toggles.noise = false;
  c.toggles.stiction = false;
  c.duration = 6.0;
  return c;
}

std::vector<std::string> verify_check_names() {
  return {"jacobian_fd",        "det_identity", "stiffness_probe",
          "equilibrium_invariance", "scheduled_dynamics", "determinism",
          "stability_cross_check"};
}

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  const std::vector<std::function<CheckResult()>> checks = {
      jacobian_fd,
      det_identity,
      stiffness_probe,
      [&] { return equilibrium_invariance(options); },
      [&] { return scheduled_dynamics(options); },
      [&] { return determinism(options); },
      [&] { return stability_cross_check(options); },
  };
  std::vector<CheckResult> results;
  const auto names = verify_check_names();
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      results.push_back(checks[i]());
    } catch (const std::exception& e) {
      results.push_back({names[i], false, std::string("error: ") + e.what()});
    }
  }
  return results;
}

}  // namespace boomforce
