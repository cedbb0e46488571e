#pragma once

// Kinematics of the planar pitch + extensible-boom (RP) arm.
//
// Angles are measured from the +x axis, which points toward the wall, so the
// tip sits at (d2 cos theta1, d2 sin theta1).

#include <Eigen/Dense>
#include <numbers>

namespace boomforce {

using Matrix2 = Eigen::Matrix2d;

struct JointState {
  double theta1 = 0.0;  // rad
  double d2 = 0.0;      // m
};

struct JointVelocity {
  double theta1_dot = 0.0;  // rad/s
  double d2_dot = 0.0;      // m/s
};

struct EndpointState {
  double x = 0.0;  // m, toward the wall
  double y = 0.0;  // m, vertical
};

struct CartesianVelocity {
  double vx = 0.0;
  double vy = 0.0;
};

struct RobotParams {
  double d2_min = 0.1;
  double d2_max = 1.5;
  double theta1_min = 0.05;
  double theta1_max = std::numbers::pi - 0.05;
  double theta1_dot_max = 2.0;  // rad/s
  double d2_dot_max = 1.0;      // m/s
  // Damped-least-squares damping. Mixed units: J has an m column and a
  // dimensionless column.
  double dls_lambda = 0.01;
};

/// Throws kInvalidArgument when limits are inconsistent.
void validate(const RobotParams& params);

EndpointState forward_kinematics(const JointState& q);

/// d(x, y)/d(theta1, d2). det(J) = -d2.
Matrix2 jacobian(const JointState& q);

/// J^T (J J^T + lambda^2 I)^-1. With lambda == 0 this is the plain inverse
/// and a singular J (|det| < 1e-9) raises kSingularMatrix.
Matrix2 dls_inverse(const Matrix2& j, double lambda);

struct RateCommand {
  JointVelocity qdot;
  bool saturated = false;  // at least one component hit its rate limit
};

/// Task-space velocity to joint rates through the damped inverse, clamped
/// componentwise to the configured rate limits.
RateCommand resolved_rate(const JointState& q, const CartesianVelocity& v_task,
                          const RobotParams& params);

}  // namespace boomforce
