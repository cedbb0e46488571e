#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "boomforce/control.hpp"
#include "boomforce/plant.hpp"

namespace boomforce {

/// sqrt(mean((f_n - f_des)^2)) over samples with t >= from_t. Sample times
/// are tick-quantized, so from_t is matched with a 1e-9 s tolerance. Raises
/// kEmptyWindow when no sample qualifies.
double rms_force_error(std::span<const TraceSample> trace, double f_des, double from_t);

struct TimedValue {
  double t = 0.0;
  double value = 0.0;
};

struct SecondOrderFit {
  double omega_n = 0.0;
  double eta = 0.0;
  double r_squared = 0.0;
  bool good = false;        // r_squared >= 0.95
  std::string method;       // feature used to seed the least-squares refinement
};

/// Estimates (omega_n, eta) of a homogeneous second-order transient
///   e'' + 2 eta omega_n e' + omega_n^2 e = 0.
///
/// Seeds from features of the signal: half-period log decrement and zero
/// crossing spacing when it oscillates, 90%-to-10% decay time (critically
/// damped mapping) otherwise. The seed is refined by least squares: for a
/// given (omega_n, eta) the response is linear in the unknown initial
/// conditions, which are solved for exactly, leaving a 2-parameter
/// Levenberg-Marquardt problem. Raises kFitFailed when the signal is too
/// short or carries no transient.
SecondOrderFit fit_second_order(std::span<const TimedValue> signal);

/// Force-error transient e = f_des - f_n restricted to [window.first,
/// window.second].
SecondOrderFit fit_second_order(std::span<const TraceSample> trace, double f_des,
                                std::pair<double, double> window);

/// Update matrix of the sampled normal loop, state [v_n, p] with f_n = k_eq p:
///   v' = (1 - dt B/M) v - dt (K_f k_eq / M) p
///   p' = p + dt v'
/// The position update uses the fresh command because the plant integrates the
/// velocity computed at the start of each force period.
Matrix2 admittance_update_matrix(const AdmittanceGains& gains, double k_eq, double dt);

double spectral_radius(const Matrix2& m);

struct DtScan {
  double dt_min = 1e-5;
  double dt_max = 0.5;
  int points = 50000;
};

struct StabilityBound {
  double max_stable_dt = 0.0;
  double resolution = 0.0;
  bool unstable_at_min = false;  // even dt_min is unstable; max_stable_dt = dt_min
};

/// Largest dt on a uniform scan whose update matrix (gains scheduled from
/// spec and k_eq) has spectral radius < 1, stopping at the first unstable
/// point.
StabilityBound stability_bound(const AdmittanceSpec& spec, double k_eq, const DtScan& scan = {});

}  // namespace boomforce
