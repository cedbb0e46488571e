#include "boomforce/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "boomforce/errors.hpp"

namespace boomforce {

void validate(const AdmittanceSpec& spec) {
  if (!(spec.omega_n > 0.0) || !(spec.eta > 0.0) || !(spec.mass > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "spec: omega_n, eta and mass must be > 0");
  }
}

AdmittanceGains schedule_gains(const AdmittanceSpec& spec, double k_eq) {
  if (!(k_eq > 0.0) || std::isinf(k_eq)) {
    throw Error(ErrorCode::kInvalidStiffness, "schedule_gains: k_eq must be finite and > 0");
  }
  return {spec.omega_n * spec.omega_n * spec.mass / k_eq,
          2.0 * spec.eta * spec.omega_n * spec.mass, spec.mass};
}

double admittance_step(const AdmittanceGains& gains, double v_n, double f_n, double f_des,
                       double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "admittance_step: dt must be > 0");
  const double decay = dt * gains.b / gains.mass;
  if (decay >= 2.0) {
    throw Error(ErrorCode::kUnstableTimestep,
                "admittance_step: dt*B/M = " + std::to_string(decay) + " >= 2");
  }
  return dt * (gains.k_f / gains.mass) * (f_des - f_n) + (1.0 - decay) * v_n;
}

Trajectory::Trajectory(std::vector<Waypoint> points) : points_(std::move(points)) {
  if (points_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "trajectory: at least one waypoint required");
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].t > points_[i - 1].t)) {
      throw Error(ErrorCode::kInvalidArgument, "trajectory: waypoint times must increase");
    }
  }
}

Trajectory Trajectory::sweep(double speed, double distance) {
  if (speed <= 0.0 || distance == 0.0) return Trajectory({{0.0, 0.0}});
  return Trajectory({{0.0, 0.0}, {std::abs(distance) / speed, distance}});
}

double Trajectory::position(double t) const {
  if (points_.empty()) return 0.0;
  if (t <= points_.front().t) return points_.front().y;
  if (t >= points_.back().t) return points_.back().y;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const Waypoint& w) { return v < w.t; });
  auto lo = hi - 1;
  const double s = (t - lo->t) / (hi->t - lo->t);
  return lo->y + s * (hi->y - lo->y);
}

double Trajectory::rate(double t) const {
  if (points_.size() < 2) return 0.0;
  if (t < points_.front().t || t >= points_.back().t) return 0.0;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const Waypoint& w) { return v < w.t; });
  auto lo = hi - 1;
  return (hi->y - lo->y) / (hi->t - lo->t);
}

void validate(const ControllerConfig& c) {
  validate(c.spec);
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "control: " + msg);
  };
  if (!(c.setpoint.f_des < 0.0)) fail("f_des must be < 0 (compression)");
  if (!(c.setpoint.k_p >= 0.0)) fail("k_p must be >= 0");
  if (!(c.setpoint.v_sweep >= 0.0)) fail("v_sweep must be >= 0");
  if (!(c.phase.v_approach > 0.0)) fail("v_approach must be > 0");
  if (!(c.phase.f_thresh > 0.0)) fail("f_thresh must be > 0");
  if (c.phase.n_consecutive < 1) fail("n_consecutive must be >= 1");
  if (!(c.phase.eps_f > 0.0)) fail("eps_f must be > 0");
  if (!(c.phase.t_hold >= 0.0)) fail("t_hold must be >= 0");
  if (c.lowpass_cutoff && !(*c.lowpass_cutoff > 0.0)) fail("lowpass_cutoff must be > 0");
}

ContactDetection detect_contact(const SensorReading& reading, const ControllerState& state,
                                double f_thresh, int n_consecutive) {
  ContactDetection out{state, false};
  if (std::abs(reading.f_n) > f_thresh) {
    ++out.state.contact_counter;
    out.detected = out.state.contact_counter == n_consecutive;
  } else {
    out.state.contact_counter = 0;
  }
  return out;
}

double tangential_velocity(const ControlSetpoint& setpoint, const PositionEstimate& estimate,
                           double t) {
  const double error = setpoint.y_traj.position(estimate.t) - estimate.y;
  return setpoint.y_traj.rate(t) + setpoint.k_p * error;
}

ControllerState phase_update(const ControllerState& state, const SensorReading& reading,
                             const ControllerConfig& config, double dt) {
  ControllerState next = state;
  switch (state.phase) {
    case Phase::kApproach: {
      const ContactDetection d =
          detect_contact(reading, state, config.phase.f_thresh, config.phase.n_consecutive);
      next = d.state;
      if (d.detected) {
        next.phase = Phase::kStabilize;
        next.v_n = -config.phase.v_approach;
        next.v_t = 0.0;
        next.hold_timer = 0.0;
        next.t_contact = reading.t;
      }
      break;
    }
    case Phase::kStabilize: {
      if (std::abs(config.setpoint.f_des - reading.f_n) < config.phase.eps_f) {
        next.hold_timer += dt;
      } else {
        next.hold_timer = 0.0;
      }
      // hold_timer accumulates dt; allow for summation round-off.
      if (next.hold_timer + 1e-9 >= config.phase.t_hold) {
        next.phase = Phase::kSweep;
        next.t_sweep = reading.t;
      }
      break;
    }
    case Phase::kSweep:
      break;
  }
  return next;
}

TickOutput controller_tick(const ControllerState& state, const SensorReading& reading,
                           const ControllerConfig& config, const StiffnessModel& stiffness,
                           const JointState& q, const RobotParams& robot, double dt) {
  TickOutput out;
  ControllerState s = state;

  SensorReading used = reading;
  if (config.lowpass_cutoff) {
    const double tau = 1.0 / (2.0 * std::numbers::pi * *config.lowpass_cutoff);
    const double alpha = dt / (dt + tau);
    s.filtered_f_n = s.filtered_f_n ? *s.filtered_f_n + alpha * (reading.f_n - *s.filtered_f_n)
                                    : reading.f_n;
    used.f_n = *s.filtered_f_n;
  }

  const Phase before = s.phase;
  s = phase_update(s, used, config, dt);
  if (s.phase == Phase::kSweep && before != Phase::kSweep) {
    s.sweep_origin_y = forward_kinematics(q).y;
  }

  if (std::sin(q.theta1) >= kDefaultSinEps) {
    out.k_eq = equivalent_stiffness(stiffness, q);
  } else if (s.phase != Phase::kApproach) {
    // Raises kNearSingularStiffness.
    out.k_eq = equivalent_stiffness(stiffness, q);
  }

  if (s.phase == Phase::kApproach) {
    s.v_n = -config.phase.v_approach;
    s.v_t = 0.0;
  } else {
    if (config.gain_hold) {
      if (!s.held_gains) s.held_gains = schedule_gains(config.spec, out.k_eq);
      out.gains = *s.held_gains;
    } else {
      out.gains = schedule_gains(config.spec, out.k_eq);
    }
    const double f_des = config.setpoint.f_des;
    const double f_n = config.fault == Fault::kAdmittanceSignFlip
                           ? 2.0 * f_des - used.f_n
                           : used.f_n;
    s.v_n = admittance_step(out.gains, s.v_n, f_n, f_des, dt);

    if (s.phase == Phase::kSweep) {
      const PositionEstimate relative{s.estimate.y - s.sweep_origin_y,
                                      s.estimate.t - *s.t_sweep};
      s.v_t = tangential_velocity(config.setpoint, relative, reading.t - *s.t_sweep);
    } else {
      s.v_t = 0.0;
    }
  }

  const RateCommand rate = resolved_rate(q, {-s.v_n, s.v_t}, robot);
  out.qdot = rate.qdot;
  out.saturated = rate.saturated;
  out.state = s;
  return out;
}

}  // namespace boomforce
