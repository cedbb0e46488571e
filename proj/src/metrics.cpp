#include "boomforce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "boomforce/errors.hpp"

namespace boomforce {

double rms_force_error(std::span<const TraceSample> trace, double f_des, double from_t) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const TraceSample& s : trace) {
    if (s.t + 1e-9 < from_t) continue;
    const double e = s.f_n - f_des;
    sum += e * e;
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::kEmptyWindow, "rms_force_error: no samples in window");
  return std::sqrt(sum / static_cast<double>(n));
}

namespace {

constexpr double kCriticalRiseToTen = 3.3579;  // omega_n * (t10 - t90) of (1 + w t) e^{-w t}

// Free responses with initial conditions (e, e') = (1, -eta omega) and (0, 1).
// Together they span every solution; the series branch keeps them smooth
// across eta = 1.
struct Basis {
  double c = 0.0;
  double s = 0.0;
};

Basis basis(double omega, double eta, double t) {
  const double decay = eta * omega;
  const double w2 = omega * omega * (1.0 - eta * eta);
  const double x = w2 * t * t;
  const double env = std::exp(-decay * t);
  if (std::abs(x) < 1e-4) {
    return {env * (1.0 - x / 2.0 + x * x / 24.0), env * t * (1.0 - x / 6.0 + x * x / 120.0)};
  }
  if (w2 > 0.0) {
    const double wd = std::sqrt(w2);
    return {env * std::cos(wd * t), env * std::sin(wd * t) / wd};
  }
  const double wh = std::sqrt(-w2);
  const double up = std::exp((-decay + wh) * t);
  const double down = std::exp((-decay - wh) * t);
  return {0.5 * (up + down), 0.5 * (up - down) / wh};
}

// Residuals after eliminating the initial conditions by linear least squares.
struct ProjectedResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  std::span<const TimedValue> signal;
  double t0 = 0.0;

  int inputs() const { return 2; }
  int values() const { return static_cast<int>(signal.size()); }

  int operator()(const Eigen::VectorXd& log_params, Eigen::VectorXd& residual) const {
    const double omega = std::exp(log_params[0]);
    const double eta = std::exp(log_params[1]);
    const Eigen::Index n = static_cast<Eigen::Index>(signal.size());
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Basis b = basis(omega, eta, signal[i].t - t0);
      a(i, 0) = b.c;
      a(i, 1) = b.s;
      y[i] = signal[i].value;
    }
    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
    residual = y - a * coef;
    if (!residual.allFinite()) residual.setConstant(1e6);
    return 0;
  }

  double ssr(double omega, double eta) const {
    Eigen::VectorXd r;
    (*this)(Eigen::Vector2d(std::log(omega), std::log(eta)), r);
    return r.squaredNorm();
  }
};

struct Seed {
  double omega = 0.0;
  double eta = 1.0;
  std::string method;
};

// Robust noise level from first differences: median |de| / (0.6745 sqrt 2).
double noise_sigma(std::span<const TimedValue> signal) {
  std::vector<double> d;
  for (std::size_t i = 1; i < signal.size(); ++i) {
    d.push_back(std::abs(signal[i].value - signal[i - 1].value));
  }
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return d[d.size() / 2] / (0.6745 * std::numbers::sqrt2);
}

std::optional<Seed> decay_seed(std::span<const TimedValue> signal) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    if (std::abs(signal[i].value) > std::abs(signal[k].value)) k = i;
  }
  const double peak = std::abs(signal[k].value);
  double t90 = -1.0;
  double t10 = -1.0;
  for (std::size_t i = k; i < signal.size(); ++i) {
    const double v = std::abs(signal[i].value);
    if (t90 < 0.0 && v <= 0.9 * peak) t90 = signal[i].t;
    if (t10 < 0.0 && v <= 0.1 * peak) {
      t10 = signal[i].t;
      break;
    }
  }
  if (t90 < 0.0 || t10 < 0.0 || t10 <= t90) return std::nullopt;
  return Seed{kCriticalRiseToTen / (t10 - t90), 1.0, "rise_time"};
}

// Oscillation features when the signal has at least two lobes outside the
// noise band.
std::optional<Seed> oscillation_seed(std::span<const TimedValue> signal, double amplitude) {
  const double band = std::max(0.02 * amplitude, 4.0 * noise_sigma(signal));

  // Lobes: maximal runs of one sign, ignoring samples inside the noise band.
  struct Lobe {
    double peak = 0.0;
    double t_peak = 0.0;
    double t_start = 0.0;
  };
  std::vector<Lobe> lobes;
  int sign = 0;
  for (const TimedValue& p : signal) {
    if (std::abs(p.value) <= band) continue;
    const int sgn = p.value > 0.0 ? 1 : -1;
    if (sgn != sign) {
      lobes.push_back({p.value, p.t, p.t});
      sign = sgn;
    } else if (std::abs(p.value) > std::abs(lobes.back().peak)) {
      lobes.back().peak = p.value;
      lobes.back().t_peak = p.t;
    }
  }

  if (lobes.size() < 2) return std::nullopt;
  const double ratio = std::abs(lobes[1].peak / lobes[0].peak);
  const double delta = -std::log(std::clamp(ratio, 1e-6, 0.999));
  Seed seed;
  seed.eta = delta / std::sqrt(std::numbers::pi * std::numbers::pi + delta * delta);
  const double half_period = lobes.size() >= 3 ? lobes[2].t_start - lobes[1].t_start
                                                : lobes[1].t_peak - lobes[0].t_peak;
  seed.omega = std::numbers::pi / (half_period * std::sqrt(1.0 - seed.eta * seed.eta));
  seed.method = "log_decrement";
  return seed;
}

struct Refined {
  double omega = 0.0;
  double eta = 0.0;
  double ssr = 0.0;
};

// Best point of a small grid around the seed, then Levenberg-Marquardt in
// (ln omega, ln eta). The projected cost can have shallow side minima.
Refined refine(const ProjectedResidual& residual, const Seed& seed) {
  double best_omega = seed.omega;
  double best_eta = seed.eta;
  double best_ssr = residual.ssr(best_omega, best_eta);
  for (double om : {0.5, 0.7, 0.85, 1.0, 1.2, 1.4, 2.0}) {
    for (double et : {0.15, 0.3, 0.5, 0.7, 0.85, 1.0, 1.2, 1.6, 2.5}) {
      const double candidate = residual.ssr(seed.omega * om, et);
      if (candidate < best_ssr) {
        best_ssr = candidate;
        best_omega = seed.omega * om;
        best_eta = et;
      }
    }
  }

  Eigen::VectorXd x(2);
  x << std::log(best_omega), std::log(best_eta);
  Eigen::NumericalDiff<ProjectedResidual> numeric(residual);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ProjectedResidual>> lm(numeric);
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 2000;
  lm.minimize(x);
  return {std::exp(x[0]), std::exp(x[1]), residual.ssr(std::exp(x[0]), std::exp(x[1]))};
}

}  // namespace

SecondOrderFit fit_second_order(std::span<const TimedValue> signal) {
  if (signal.size() < 20) {
    throw Error(ErrorCode::kFitFailed, "fit_second_order: fewer than 20 samples");
  }
  double amplitude = 0.0;
  double sst = 0.0;
  for (const TimedValue& p : signal) {
    amplitude = std::max(amplitude, std::abs(p.value));
    sst += p.value * p.value;
  }
  if (!(amplitude > 1e-9)) {
    throw Error(ErrorCode::kFitFailed, "fit_second_order: no transient in signal");
  }

  std::vector<Seed> seeds;
  if (auto osc = oscillation_seed(signal, amplitude)) seeds.push_back(*osc);
  if (auto dec = decay_seed(signal)) seeds.push_back(*dec);
  if (seeds.empty()) {
    throw Error(ErrorCode::kFitFailed, "fit_second_order: transient does not decay within window");
  }

  // Each feature seeds its own refinement; keep the lowest residual. Ties go
  // to the oscillation features, listed first.
  const ProjectedResidual residual{signal, signal.front().t};
  Refined best;
  std::string method;
  for (const Seed& seed : seeds) {
    const Refined r = refine(residual, seed);
    if (method.empty() || r.ssr < best.ssr * (1.0 - 1e-6) - 1e-12 * sst) {
      best = r;
      method = seed.method;
    }
  }

  SecondOrderFit fit;
  fit.omega_n = best.omega;
  fit.eta = best.eta;
  fit.r_squared = 1.0 - best.ssr / sst;
  fit.good = fit.r_squared >= 0.95;
  fit.method = method;
  if (!std::isfinite(fit.omega_n) || !std::isfinite(fit.eta) || fit.r_squared < 0.5) {
    throw Error(ErrorCode::kFitFailed, "fit_second_order: transient buried in noise");
  }
  return fit;
}

SecondOrderFit fit_second_order(std::span<const TraceSample> trace, double f_des,
                                std::pair<double, double> window) {
  std::vector<TimedValue> signal;
  for (const TraceSample& s : trace) {
    if (s.t + 1e-9 >= window.first && s.t <= window.second + 1e-9) {
      signal.push_back({s.t, f_des - s.f_n});
    }
  }
  return fit_second_order(signal);
}

Matrix2 admittance_update_matrix(const AdmittanceGains& gains, double k_eq, double dt) {
  const double a = 1.0 - dt * gains.b / gains.mass;
  const double c = dt * gains.k_f * k_eq / gains.mass;
  Matrix2 m;
  m << a, -c,
       dt * a, 1.0 - dt * c;
  return m;
}

double spectral_radius(const Matrix2& m) {
  const double half_trace = 0.5 * m.trace();
  const double det = m.determinant();
  const double disc = half_trace * half_trace - det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    return std::max(std::abs(half_trace + root), std::abs(half_trace - root));
  }
  return std::sqrt(det);
}

StabilityBound stability_bound(const AdmittanceSpec& spec, double k_eq, const DtScan& scan) {
  if (!(scan.dt_min > 0.0) || !(scan.dt_max > scan.dt_min) || scan.points < 2) {
    throw Error(ErrorCode::kInvalidArgument, "stability_bound: invalid scan range");
  }
  const AdmittanceGains gains = schedule_gains(spec, k_eq);
  StabilityBound out;
  out.resolution = (scan.dt_max - scan.dt_min) / (scan.points - 1);
  out.max_stable_dt = scan.dt_min;
  for (int i = 0; i < scan.points; ++i) {
    const double dt = scan.dt_min + i * out.resolution;
    if (spectral_radius(admittance_update_matrix(gains, k_eq, dt)) >= 1.0) {
      out.unstable_at_min = i == 0;
      return out;
    }
    out.max_stable_dt = dt;
  }
  return out;
}

}  // namespace boomforce
