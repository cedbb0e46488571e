#include "boomforce/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "boomforce/errors.hpp"

namespace boomforce {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSingularMatrix: return "SingularMatrix";
    case ErrorCode::kNearSingularStiffness: return "NearSingularStiffness";
    case ErrorCode::kInvalidStiffness: return "InvalidStiffness";
    case ErrorCode::kUnstableTimestep: return "UnstableTimestep";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyWindow: return "EmptyWindow";
    case ErrorCode::kFitFailed: return "FitFailed";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

void validate(const RobotParams& p) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "robot: " + msg);
  };
  if (!(p.d2_min > 0.0)) fail("d2_min must be > 0");
  if (!(p.d2_max > p.d2_min)) fail("d2_max must exceed d2_min");
  if (!(p.theta1_min > 0.0 && p.theta1_max < std::numbers::pi &&
        p.theta1_min < p.theta1_max)) {
    fail("pitch limits must satisfy 0 < theta1_min < theta1_max < pi");
  }
  if (!(p.theta1_dot_max > 0.0) || !(p.d2_dot_max > 0.0)) {
    fail("rate limits must be > 0");
  }
  if (!(p.dls_lambda >= 0.0)) fail("dls_lambda must be >= 0");
}

EndpointState forward_kinematics(const JointState& q) {
  return {q.d2 * std::cos(q.theta1), q.d2 * std::sin(q.theta1)};
}

Matrix2 jacobian(const JointState& q) {
  const double s = std::sin(q.theta1);
  const double c = std::cos(q.theta1);
  Matrix2 j;
  j << -q.d2 * s, c,
        q.d2 * c, s;
  return j;
}

Matrix2 dls_inverse(const Matrix2& j, double lambda) {
  if (!(lambda >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dls_inverse: lambda must be >= 0");
  }
  if (lambda == 0.0) {
    if (std::abs(j.determinant()) < 1e-9) {
      throw Error(ErrorCode::kSingularMatrix,
                  "dls_inverse: singular Jacobian with zero damping");
    }
    return j.inverse();
  }
  const Matrix2 jjt = j * j.transpose() + lambda * lambda * Matrix2::Identity();
  return j.transpose() * jjt.inverse();
}

RateCommand resolved_rate(const JointState& q, const CartesianVelocity& v_task,
                          const RobotParams& params) {
  if (!std::isfinite(v_task.vx) || !std::isfinite(v_task.vy)) {
    throw Error(ErrorCode::kInvalidArgument, "resolved_rate: non-finite task velocity");
  }
  const Eigen::Vector2d qdot =
      dls_inverse(jacobian(q), params.dls_lambda) * Eigen::Vector2d(v_task.vx, v_task.vy);

  RateCommand out;
  out.qdot.theta1_dot = std::clamp(qdot[0], -params.theta1_dot_max, params.theta1_dot_max);
  out.qdot.d2_dot = std::clamp(qdot[1], -params.d2_dot_max, params.d2_dot_max);
  out.saturated = out.qdot.theta1_dot != qdot[0] || out.qdot.d2_dot != qdot[1];
  return out;
}

}  // namespace boomforce
