#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "boomforce/compliance.hpp"
#include "boomforce/control.hpp"
#include "boomforce/model.hpp"
#include "boomforce/plant.hpp"

namespace boomforce {

struct Toggles {
  bool noise = true;
  bool stiction = true;
  bool gain_hold = false;
  std::optional<double> lowpass_cutoff;  // Hz
};

// Defaults reproduce the wall-cleaning trial: contact near theta1 = 60 deg at
// d2 ~ 0.3 m, then an upward sweep that extends the boom to ~1.0 m.
struct ScenarioConfig {
  RobotParams robot;
  StiffnessModel stiffness;
  WorldModel world;
  AdmittanceSpec spec;
  ControlSetpoint setpoint;
  PhaseConfig control;
  LoopTiming timing;
  JointState q0{1.1071487177940904, 0.29068883707497267};  // tip at (0.13, 0.26)
  double duration = 20.0;
  Toggles toggles;
  Fault fault = Fault::kNone;
};

/// Validates every component; raises kInvalidArgument / kInvalidStiffness.
void validate(const ScenarioConfig& config);

/// World model as the plant sees it once toggles are applied: noise off
/// zeroes sigma, stiction off zeroes friction and coupling.
WorldModel effective_world(const ScenarioConfig& config);
ControllerConfig controller_config(const ScenarioConfig& config);

struct RunSummary {
  std::optional<double> rms_force_error_after_contact;  // N
  double max_overshoot = 0.0;                           // N beyond |f_des|
  std::optional<double> settle_time;                    // contact -> sweep, s
  std::optional<double> sweep_force_rms;                // N
  std::pair<double, double> d2_range{0.0, 0.0};
  std::optional<double> t_contact;
  std::optional<double> t_sweep;
  bool diverged = false;
  std::string diverged_reason;
  bool insufficient_contact_window = false;
  double final_force_error = 0.0;  // |f_n - f_des| at the last sample
  double f_des = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

struct ScenarioResult {
  Trace trace;
  RunSummary summary;
};

/// Runs the full control stack against the plant. Divergence (|f_n| > 10
/// |f_des|, a joint limit pinned for more than 1 s, a non-finite command, or
/// a control-stack error such as an unstable timestep) ends the run early and
/// is reported in the summary; the partial trace is kept.
ScenarioResult run_scenario(const ScenarioConfig& config);

/// Summary statistics of an existing trace.
RunSummary summarize(const Trace& trace, const ScenarioConfig& config);

}  // namespace boomforce
