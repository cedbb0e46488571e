#include "boomforce/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boomforce/errors.hpp"
#include "boomforce/metrics.hpp"

namespace boomforce {

namespace {
constexpr double kDivergenceForceRatio = 10.0;
constexpr double kPinnedLimitSeconds = 1.0;
}  // namespace

void validate(const ScenarioConfig& c) {
  validate(c.robot);
  validate(c.stiffness);
  validate(c.world);
  validate(c.timing);
  validate(controller_config(c));
  if (!(c.duration > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "duration must be > 0");
  }
  if (!(c.q0.d2 >= c.robot.d2_min && c.q0.d2 <= c.robot.d2_max &&
        c.q0.theta1 >= c.robot.theta1_min && c.q0.theta1 <= c.robot.theta1_max)) {
    throw Error(ErrorCode::kInvalidArgument, "q0 must lie within the joint limits");
  }
}

WorldModel effective_world(const ScenarioConfig& c) {
  WorldModel w = c.world;
  if (!c.toggles.noise) w.noise_sigma = 0.0;
  if (!c.toggles.stiction) {
    w.mu_s = 0.0;
    w.mu_k = 0.0;
    w.stiction_coupling = 0.0;
  }
  return w;
}

ControllerConfig controller_config(const ScenarioConfig& c) {
  ControllerConfig cc;
  cc.spec = c.spec;
  cc.setpoint = c.setpoint;
  cc.phase = c.control;
  cc.gain_hold = c.toggles.gain_hold;
  cc.lowpass_cutoff = c.toggles.lowpass_cutoff;
  cc.fault = c.fault;
  return cc;
}

RunSummary summarize(const Trace& trace, const ScenarioConfig& config) {
  RunSummary s;
  s.f_des = config.setpoint.f_des;
  s.seed = config.world.seed;
  s.samples = trace.size();
  if (trace.empty()) {
    s.insufficient_contact_window = true;
    return s;
  }

  double d2_lo = std::numeric_limits<double>::infinity();
  double d2_hi = -std::numeric_limits<double>::infinity();
  for (const TraceSample& row : trace) {
    d2_lo = std::min(d2_lo, row.d2);
    d2_hi = std::max(d2_hi, row.d2);
    if (!s.t_contact && row.phase != Phase::kApproach) s.t_contact = row.t;
    if (!s.t_sweep && row.phase == Phase::kSweep) s.t_sweep = row.t;
  }
  s.d2_range = {d2_lo, d2_hi};
  s.final_force_error = std::abs(trace.back().f_n - s.f_des);

  std::size_t after_contact = 0;
  if (s.t_contact) {
    const double direction = s.f_des < 0.0 ? -1.0 : 1.0;
    for (const TraceSample& row : trace) {
      if (row.t + 1e-9 < *s.t_contact) continue;
      ++after_contact;
      s.max_overshoot = std::max(s.max_overshoot, (row.f_n - s.f_des) * direction);
    }
    s.rms_force_error_after_contact = rms_force_error(trace, s.f_des, *s.t_contact);
  }
  s.insufficient_contact_window = after_contact < 2;

  if (s.t_sweep) {
    s.settle_time = *s.t_sweep - *s.t_contact;
    s.sweep_force_rms = rms_force_error(trace, s.f_des, *s.t_sweep);
  }
  return s;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  validate(config);
  const ControllerConfig cc = controller_config(config);
  const WorldModel world = effective_world(config);
  const double dt_force = config.timing.dt_force;
  const double force_limit = kDivergenceForceRatio * std::abs(config.setpoint.f_des);

  ControllerState controller;
  bool diverged = false;
  std::string reason;

  TimelineCallbacks callbacks;
  callbacks.on_trajectory = [&](const PositionEstimate& estimate, double) {
    controller.estimate = estimate;
  };
  callbacks.on_force = [&](const SensorReading& reading, const PlantState& plant,
                           double t) -> ForceCommand {
    SensorReading stamped = reading;
    stamped.t = t;
    ForceCommand cmd;
    auto stop = [&](std::string why) {
      diverged = true;
      reason = std::move(why);
      cmd.stop = true;
      cmd.qdot = {};
    };
    try {
      const TickOutput out = controller_tick(controller, stamped, cc, config.stiffness,
                                             plant.q_nominal, config.robot, dt_force);
      controller = out.state;
      cmd.qdot = out.qdot;
      cmd.k_eq = out.k_eq;
      cmd.k_f = out.gains.k_f;
      cmd.b = out.gains.b;
    } catch (const Error& e) {
      stop(std::string(to_string(e.code())) + ": " + e.what());
    }
    cmd.phase = controller.phase;
    cmd.v_n_cmd = controller.v_n;
    cmd.v_t_cmd = controller.v_t;
    if (cmd.stop) return cmd;

    if (!std::isfinite(controller.v_n) || !std::isfinite(controller.v_t)) {
      stop("non-finite velocity command");
    } else if (std::abs(reading.f_n) > force_limit) {
      stop("normal force exceeded 10x setpoint");
    } else if (plant.limit_pinned_time > kPinnedLimitSeconds) {
      stop("joint limit pinned for more than 1 s");
    }
    return cmd;
  };

  TimelineResult timeline =
      run_timeline(config.duration, config.timing, callbacks, world, config.stiffness,
                   config.robot, config.q0);

  ScenarioResult result;
  result.summary = summarize(timeline.trace, config);
  result.summary.diverged = diverged;
  result.summary.diverged_reason = reason;
  result.trace = std::move(timeline.trace);
  return result;
}

}  // namespace boomforce
