#include "boomforce/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "boomforce/errors.hpp"

namespace boomforce {
namespace {

bool is_multiple(double period, double base) {
  const double ratio = period / base;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

long long ticks_of(double period, double base) {
  return std::llround(period / base);
}

double sign_or(double value, double fallback) {
  if (value > 0.0) return 1.0;
  if (value < 0.0) return -1.0;
  return fallback;
}

double noise_sample(PlantState& state, double sigma) {
  if (sigma <= 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, sigma);
  return dist(state.rng);
}

}  // namespace

void validate(const WorldModel& w) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "world: " + msg);
  };
  if (!std::isfinite(w.wall_x)) fail("wall_x must be finite");
  if (!(w.mu_k >= 0.0) || !(w.mu_s >= w.mu_k)) fail("need mu_s >= mu_k >= 0");
  if (!(w.noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (!(w.stiction_coupling >= 0.0 && w.stiction_coupling <= 1.0)) {
    fail("stiction_coupling must lie in [0, 1]");
  }
  if (!(w.k_wrist > 0.0)) fail("k_wrist must be > 0");
  if (!(w.slip_length > 0.0)) fail("slip_length must be > 0");
  if (!(w.stick_speed >= 0.0)) fail("stick_speed must be >= 0");
}

void validate(const LoopTiming& t) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "timing: " + msg);
  };
  if (!(t.dt_plant > 0.0)) fail("dt_plant must be > 0");
  if (!(t.dt_plant <= t.dt_force && t.dt_force <= t.dt_traj)) {
    fail("need dt_plant <= dt_force <= dt_traj");
  }
  if (!is_multiple(t.dt_force, t.dt_plant)) fail("dt_force must be a multiple of dt_plant");
  if (!is_multiple(t.dt_traj, t.dt_plant)) fail("dt_traj must be a multiple of dt_plant");
}

PlantState PlantState::initial(const JointState& q0, std::uint64_t seed) {
  PlantState s;
  s.q_nominal = q0;
  s.rng.seed(seed);
  return s;
}

double wall_clearance(const JointState& q_nominal, const WorldModel& world) {
  return world.wall_x - forward_kinematics(q_nominal).x;
}

double contact_force(const JointState& q_nominal, const WorldModel& world,
                     const StiffnessModel& stiffness) {
  const double p = wall_clearance(q_nominal, world);
  if (p >= 0.0) return 0.0;
  return equivalent_stiffness(stiffness, q_nominal) * p;
}

SensorReading sense(PlantState& state, const WorldModel& world,
                    const StiffnessModel& stiffness) {
  SensorReading r;
  r.f_n = contact_force(state.q_nominal, world, stiffness) +
          world.stiction_coupling * state.stick_transient +
          noise_sample(state, world.noise_sigma);
  r.f_t = state.f_t;
  r.t = state.t;
  return r;
}

StepResult plant_step(const PlantState& state, const JointVelocity& qdot_cmd,
                      const WorldModel& world, const StiffnessModel& stiffness,
                      const RobotParams& robot, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "plant_step: dt must be > 0");

  StepResult out{state, {}, false};
  PlantState& s = out.state;
  const double y_before = forward_kinematics(s.q_nominal).y;

  const double theta_raw = s.q_nominal.theta1 + qdot_cmd.theta1_dot * dt;
  const double d2_raw = s.q_nominal.d2 + qdot_cmd.d2_dot * dt;
  s.q_nominal.theta1 = std::clamp(theta_raw, robot.theta1_min, robot.theta1_max);
  s.q_nominal.d2 = std::clamp(d2_raw, robot.d2_min, robot.d2_max);
  out.limit_hit = s.q_nominal.theta1 != theta_raw || s.q_nominal.d2 != d2_raw;
  s.limit_pinned_time = out.limit_hit ? s.limit_pinned_time + dt : 0.0;
  s.t = state.t + dt;

  const double f_ideal = contact_force(s.q_nominal, world, stiffness);
  const double y = forward_kinematics(s.q_nominal).y;
  const double y_dot = (y - y_before) / dt;
  const bool was_in_contact = s.in_contact;
  s.in_contact = f_ideal < 0.0;

  if (!s.in_contact) {
    s.sticking = false;
    s.f_t = 0.0;
    s.stick_transient = 0.0;
    s.breakaway_load = 0.0;
    s.slip_distance = 0.0;
  } else {
    const double normal = std::abs(f_ideal);
    if (!was_in_contact) {
      s.sticking = true;
      s.stick_anchor_y = y;
    }
    if (s.sticking) {
      const double load = world.k_wrist * (y - s.stick_anchor_y);
      const double limit = world.mu_s * normal;
      if (std::abs(load) > limit) {
        s.sticking = false;
        s.breakaway_load = std::copysign(limit, load);
        s.slip_distance = 0.0;
        s.f_t = world.mu_k * normal * sign_or(y_dot, sign_or(load, 1.0));
        s.stick_transient = s.breakaway_load;
      } else {
        s.f_t = load;
        s.stick_transient = load;
      }
    } else {
      s.slip_distance += std::abs(y - y_before);
      if (std::abs(y_dot) < world.stick_speed) {
        s.sticking = true;
        s.stick_anchor_y = y;
        s.f_t = 0.0;
        s.stick_transient = 0.0;
      } else {
        s.f_t = world.mu_k * normal * sign_or(y_dot, 1.0);
        s.stick_transient =
            s.breakaway_load * std::exp(-s.slip_distance / world.slip_length);
      }
    }
  }

  out.reading.f_n = f_ideal + world.stiction_coupling * s.stick_transient +
                    noise_sample(s, world.noise_sigma);
  out.reading.f_t = s.f_t;
  out.reading.t = s.t;
  return out;
}

std::string_view to_token(Phase phase) {
  switch (phase) {
    case Phase::kApproach: return "approach";
    case Phase::kStabilize: return "stabilize";
    case Phase::kSweep: return "sweep";
  }
  return "unknown";
}

TimelineResult run_timeline(double duration, const LoopTiming& timing,
                            const TimelineCallbacks& callbacks, const WorldModel& world,
                            const StiffnessModel& stiffness, const RobotParams& robot,
                            const JointState& q0) {
  validate(timing);
  if (!(duration > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "run_timeline: duration must be > 0");
  }
  if (!callbacks.on_force) {
    throw Error(ErrorCode::kInvalidArgument, "run_timeline: force callback required");
  }

  const long long n_ticks = ticks_of(duration, timing.dt_plant);
  const long long force_every = ticks_of(timing.dt_force, timing.dt_plant);
  const long long traj_every = ticks_of(timing.dt_traj, timing.dt_plant);

  TimelineResult result;
  result.trace.reserve(static_cast<std::size_t>(n_ticks / force_every + 1));

  PlantState state = PlantState::initial(q0, world.seed);
  SensorReading latest = sense(state, world, stiffness);
  PositionEstimate previous_sample{forward_kinematics(q0).y, 0.0};
  JointVelocity latched{};

  for (long long i = 0; i < n_ticks; ++i) {
    const double t = static_cast<double>(i) * timing.dt_plant;

    if (i % traj_every == 0) {
      const PositionEstimate current{forward_kinematics(state.q_nominal).y, t};
      if (callbacks.on_trajectory) {
        callbacks.on_trajectory(i == 0 ? current : previous_sample, t);
      }
      previous_sample = current;
    }

    if (i % force_every == 0) {
      const ForceCommand cmd = callbacks.on_force(latest, state, t);
      latched = cmd.qdot;
      const EndpointState tip = forward_kinematics(state.q_nominal);
      result.trace.push_back({t, cmd.phase, state.q_nominal.theta1, state.q_nominal.d2,
                              tip.x, tip.y, latest.f_n, latest.f_t, cmd.v_n_cmd,
                              cmd.v_t_cmd, cmd.k_eq, cmd.k_f, cmd.b});
      if (cmd.stop) {
        result.stopped_early = true;
        break;
      }
    }

    StepResult step = plant_step(state, latched, world, stiffness, robot, timing.dt_plant);
    state = std::move(step.state);
    // Re-derive time from the tick index so it never drifts from the trace.
    state.t = static_cast<double>(i + 1) * timing.dt_plant;
    latest = step.reading;
    latest.t = state.t;
  }

  result.final_state = std::move(state);
  return result;
}

}  // namespace boomforce
