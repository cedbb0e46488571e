#pragma once

// Gain-scheduled velocity admittance on the surface normal, tangential
// trajectory tracking, and the approach / stabilize / sweep phase machine.
//
// Sign conventions: the task normal n = (-1, 0) points out of the wall, so a
// positive v_n retreats. Contact forces are negative in compression and the
// force setpoint is negative when pressing.

#include <optional>
#include <vector>

#include "boomforce/compliance.hpp"
#include "boomforce/model.hpp"
#include "boomforce/plant.hpp"

namespace boomforce {

struct AdmittanceSpec {
  double omega_n = 10.0;  // rad/s
  double eta = 1.0;
  double mass = 1.0;      // kg
};

void validate(const AdmittanceSpec& spec);

struct AdmittanceGains {
  double k_f = 0.0;
  double b = 0.0;
  double mass = 1.0;
};

/// K_f = omega_n^2 M / k_eq and B = 2 eta omega_n M, which place the
/// force-error poles at (omega_n, eta) whatever the contact stiffness.
AdmittanceGains schedule_gains(const AdmittanceSpec& spec, double k_eq);

/// Forward-Euler step of M dv/dt + B v = K_f (f_des - f_n):
///   v' = dt (K_f / M)(f_des - f_n) + (1 - dt B / M) v
/// Raises kUnstableTimestep when dt B / M >= 2.
double admittance_step(const AdmittanceGains& gains, double v_n, double f_n, double f_des,
                       double dt);

struct Waypoint {
  double t = 0.0;  // s, relative to the trajectory origin
  double y = 0.0;  // m, relative to the trajectory origin
};

// Piecewise-linear tangential reference. Holds the first/last waypoint
// outside its time span.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Waypoint> points);

  /// Constant-speed sweep over `distance`, then hold.
  static Trajectory sweep(double speed, double distance);

  double position(double t) const;
  double rate(double t) const;
  const std::vector<Waypoint>& points() const { return points_; }

 private:
  std::vector<Waypoint> points_;
};

struct ControlSetpoint {
  double f_des = -2.0;   // N
  double v_sweep = 0.05;  // m/s
  double k_p = 2.0;       // 1/s
  double sweep_distance = 0.725;  // m
  // Reference relative to the sweep origin; config loading rebuilds it from
  // v_sweep and sweep_distance unless explicit waypoints are given.
  Trajectory y_traj = Trajectory::sweep(0.05, 0.725);
};

struct PhaseConfig {
  double v_approach = 0.02;  // m/s, into the surface
  double f_thresh = 0.3;     // N
  int n_consecutive = 5;
  double eps_f = 0.1;        // N
  double t_hold = 0.5;       // s
};

// Fault injection for verification self-tests.
enum class Fault { kNone, kAdmittanceSignFlip };

struct ControllerConfig {
  AdmittanceSpec spec;
  ControlSetpoint setpoint;
  PhaseConfig phase;
  bool gain_hold = false;                 // freeze gains at contact
  std::optional<double> lowpass_cutoff;   // Hz, off when empty
  Fault fault = Fault::kNone;
};

void validate(const ControllerConfig& config);

struct ControllerState {
  Phase phase = Phase::kApproach;
  double v_n = 0.0;
  double v_t = 0.0;
  int contact_counter = 0;
  double hold_timer = 0.0;

  std::optional<double> t_contact;
  std::optional<double> t_sweep;
  double sweep_origin_y = 0.0;
  PositionEstimate estimate;
  std::optional<double> filtered_f_n;
  std::optional<AdmittanceGains> held_gains;
};

struct ContactDetection {
  ControllerState state;
  bool detected = false;
};

/// Counts consecutive readings with |f_n| > f_thresh; reports true on the
/// reading that brings the count to n_consecutive.
ContactDetection detect_contact(const SensorReading& reading, const ControllerState& state,
                                double f_thresh, int n_consecutive);

/// v_t = ydot_ref(t) + K_p (y_ref(t_est) - y_est). Times and positions are
/// relative to the sweep origin. The feedforward is evaluated now; the
/// correction at the time the (delayed) estimate was taken.
double tangential_velocity(const ControlSetpoint& setpoint, const PositionEstimate& estimate,
                           double t);

ControllerState phase_update(const ControllerState& state, const SensorReading& reading,
                             const ControllerConfig& config, double dt);

struct TickOutput {
  ControllerState state;
  JointVelocity qdot;
  bool saturated = false;
  double k_eq = 0.0;
  AdmittanceGains gains;
};

/// One force-loop tick: phase machine, admittance on the normal, tangential
/// tracking in Sweep, then resolved-rate mapping of
/// v = v_n (-1, 0) + v_t (0, 1).
TickOutput controller_tick(const ControllerState& state, const SensorReading& reading,
                           const ControllerConfig& config, const StiffnessModel& stiffness,
                           const JointState& q, const RobotParams& robot, double dt);

}  // namespace boomforce
