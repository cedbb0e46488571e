#pragma once

#include <limits>

#include "boomforce/model.hpp"

namespace boomforce {

inline constexpr double kRigid = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultSinEps = 1e-3;

struct StiffnessModel {
  double k_theta = 60.0;  // N*m/rad, lumped pitch-joint stiffness
  double k_ee = 5000.0;   // N/m, contact stiffness; kRigid for a rigid contact
};

void validate(const StiffnessModel& model);

/// Pitch stiffness reflected onto the wall normal: k_theta / (d2 sin theta1)^2.
///
/// Follows from dx = -d2 sin(theta1) dtheta1 together with the torque balance
/// tau1 = -F_x d2 sin(theta1) = -k_theta dtheta1. Raises
/// kNearSingularStiffness when sin(theta1) < sin_eps, where a normal force has
/// no moment arm about the pitch joint.
double task_normal_stiffness(const StiffnessModel& model, const JointState& q,
                             double sin_eps = kDefaultSinEps);

/// Two springs in series. Either operand may be kRigid.
double series_stiffness(double k_a, double k_b);

/// Series combination of the reflected arm stiffness and the contact
/// stiffness; the k_eq the gain scheduler consumes.
double equivalent_stiffness(const StiffnessModel& model, const JointState& q,
                            double sin_eps = kDefaultSinEps);

}  // namespace boomforce
