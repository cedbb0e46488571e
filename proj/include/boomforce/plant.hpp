#pragma once

// Quasi-static simulated world: a rigid planar wall at x = wall_x (outward
// normal -x), penalty contact through the series arm/contact stiffness, a
// stick-slip wrist model, a noisy force sensor, and the fixed-order multi-rate
// scheduler that drives the controllers.

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

#include "boomforce/compliance.hpp"
#include "boomforce/model.hpp"

namespace boomforce {

struct WorldModel {
  double wall_x = 0.15;            // m
  double mu_s = 0.4;
  double mu_k = 0.3;
  double stiction_coupling = 0.1;  // share of the stick load seen on the normal axis
  double noise_sigma = 0.02;       // N
  std::uint64_t seed = 42;
  double k_wrist = 500.0;          // N/m, lateral wrist spring
  double slip_length = 0.002;      // m, decay length of the breakaway transient
  double stick_speed = 1e-4;       // m/s, re-stick below this tangential speed
};

void validate(const WorldModel& world);

struct LoopTiming {
  double dt_plant = 5e-4;
  double dt_force = 2e-3;
  double dt_traj = 0.1;
};

/// Checks ordering and that both loop periods are integer multiples of
/// dt_plant (to 1e-9 relative).
void validate(const LoopTiming& timing);

struct SensorReading {
  double f_n = 0.0;  // N, negative in compression
  double f_t = 0.0;  // N
  double t = 0.0;
};

struct PlantState {
  JointState q_nominal;
  double t = 0.0;
  bool in_contact = false;
  bool sticking = false;
  double stick_anchor_y = 0.0;
  double breakaway_load = 0.0;   // stick load at the last breakaway, N
  double slip_distance = 0.0;    // tangential travel since breakaway, m
  double f_t = 0.0;              // current tangential load, N
  double stick_transient = 0.0;  // tangential load coupled into the normal axis, N
  double limit_pinned_time = 0.0;  // continuous time spent on a joint limit, s
  std::mt19937_64 rng{42};

  static PlantState initial(const JointState& q0, std::uint64_t seed);
};

/// Ideal (noise-free) normal force for the nominal configuration: zero when
/// the nominal tip is short of the wall, k_eq * p otherwise, with p the signed
/// clearance wall_x - x_tip (negative when penetrating).
double contact_force(const JointState& q_nominal, const WorldModel& world,
                     const StiffnessModel& stiffness);

double wall_clearance(const JointState& q_nominal, const WorldModel& world);

struct StepResult {
  PlantState state;
  SensorReading reading;
  bool limit_hit = false;
};

StepResult plant_step(const PlantState& state, const JointVelocity& qdot_cmd,
                      const WorldModel& world, const StiffnessModel& stiffness,
                      const RobotParams& robot, double dt);

/// Sensor reading at the current state without advancing time. Draws one
/// noise sample.
SensorReading sense(PlantState& state, const WorldModel& world,
                    const StiffnessModel& stiffness);

enum class Phase { kApproach, kStabilize, kSweep };

std::string_view to_token(Phase phase);

struct TraceSample {
  double t = 0.0;
  Phase phase = Phase::kApproach;
  double theta1 = 0.0;
  double d2 = 0.0;
  double x = 0.0;
  double y = 0.0;
  double f_n = 0.0;
  double f_t = 0.0;
  double v_n_cmd = 0.0;
  double v_t_cmd = 0.0;
  double k_eq = 0.0;
  double k_f = 0.0;
  double b = 0.0;
};

using Trace = std::vector<TraceSample>;

struct PositionEstimate {
  double y = 0.0;
  double t = 0.0;  // time the position was sampled
};

// What the force-loop callback hands back to the scheduler.
struct ForceCommand {
  JointVelocity qdot;
  Phase phase = Phase::kApproach;
  double v_n_cmd = 0.0;
  double v_t_cmd = 0.0;
  double k_eq = 0.0;
  double k_f = 0.0;
  double b = 0.0;
  bool stop = false;  // end the run after logging this tick
};

struct TimelineCallbacks {
  // Trajectory-loop boundary. Receives the position sampled one trajectory
  // period earlier (or at t = 0 on the first boundary).
  std::function<void(const PositionEstimate&, double t)> on_trajectory;
  std::function<ForceCommand(const SensorReading&, const PlantState&, double t)> on_force;
};

struct TimelineResult {
  Trace trace;
  PlantState final_state;
  bool stopped_early = false;
};

/// Fixed-order scheduler. On every plant tick: trajectory callback (on its
/// boundaries), then force callback (on its boundaries, one trace row each),
/// then one plant step with the latched joint command. Deterministic for a
/// given seed.
TimelineResult run_timeline(double duration, const LoopTiming& timing,
                            const TimelineCallbacks& callbacks, const WorldModel& world,
                            const StiffnessModel& stiffness, const RobotParams& robot,
                            const JointState& q0);

}  // namespace boomforce
