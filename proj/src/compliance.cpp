#include "boomforce/compliance.hpp"

#include <cmath>

#include "boomforce/errors.hpp"

namespace boomforce {

void validate(const StiffnessModel& model) {
  if (!(model.k_theta > 0.0) || std::isinf(model.k_theta)) {
    throw Error(ErrorCode::kInvalidStiffness, "stiffness: k_theta must be finite and > 0");
  }
  if (!(model.k_ee > 0.0)) {
    throw Error(ErrorCode::kInvalidStiffness, "stiffness: k_ee must be > 0 (or inf)");
  }
}

double task_normal_stiffness(const StiffnessModel& model, const JointState& q,
                             double sin_eps) {
  const double s = std::sin(q.theta1);
  if (s < sin_eps) {
    throw Error(ErrorCode::kNearSingularStiffness,
                "task_normal_stiffness: sin(theta1) below guard, normal stiffness unbounded");
  }
  const double arm = q.d2 * s;
  return model.k_theta / (arm * arm);
}

double series_stiffness(double k_a, double k_b) {
  if (!(k_a > 0.0) || !(k_b > 0.0)) {
    throw Error(ErrorCode::kInvalidStiffness, "series_stiffness: operands must be > 0");
  }
  if (std::isinf(k_a)) return k_b;
  if (std::isinf(k_b)) return k_a;
  return 1.0 / (1.0 / k_a + 1.0 / k_b);
}

double equivalent_stiffness(const StiffnessModel& model, const JointState& q,
                            double sin_eps) {
  return series_stiffness(task_normal_stiffness(model, q, sin_eps), model.k_ee);
}

}  // namespace boomforce
