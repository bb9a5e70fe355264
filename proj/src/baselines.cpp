#include "cdpcal/baselines.hpp"

#include <cmath>
#include <numbers>

namespace cdpcal {

namespace {

// Rational initial guess for the inverse of the standard normal CDF at
// p = (1 + x) / 2, expressed directly in x to avoid cancellation near x = 1
// (Acklam's minimax coefficients; relative error ~1.15e-9 before polish).
double initial_guess(double x) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};

  const double ax = std::abs(x);
  double z;
  if (ax <= 0.95) {
    // central region: q = p - 1/2 = x/2 exactly
    const double q = x / 2.0;
    const double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    // tail: 1 - ax is exact for ax in [0.5, 1); the rational gives the
    // (negative) lower-tail quantile, mirrored for the upper tail
    const double q = std::sqrt(-2.0 * std::log((1.0 - ax) / 2.0));
    const double r = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                     ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    z = (x > 0.0) ? -r : r;
  }
  return z / std::numbers::sqrt2;  // normal quantile -> erf inverse scale
}

}  // namespace

double inverse_erf(double x) {
  if (!(x > -1.0 && x < 1.0)) {
    throw error(errc::domain_error, "inverse_erf: argument must lie strictly inside (-1, 1)");
  }
  if (x == 0.0) return 0.0;

  const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
  double t = initial_guess(x);
  // Newton in erf space. Steps are guarded: once erf saturates in double
  // precision the quotient is meaningless, and the guess is already at the
  // representable optimum there.
  for (int i = 0; i < 3; ++i) {
    const double e = std::erf(t) - x;
    if (e == 0.0) break;
    const double step = e / (two_over_sqrt_pi * std::exp(-t * t));
    if (!std::isfinite(step) || std::abs(step) > 0.5) break;
    t -= step;
  }
  return t;
}

double gaussian_two_sided_z(Alpha alpha) {
  return std::numbers::sqrt2 * inverse_erf(1.0 - alpha.value());
}

CqrCalibration calibrate_cqr(const std::vector<QuantilePredictionRecord>& cal, Alpha alpha,
                             const std::optional<TargetBounds>& bounds) {
  if (cal.empty()) {
    throw error(errc::empty_calibration, "calibrate_cqr: empty calibration set");
  }
  std::vector<double> scores;
  scores.reserve(cal.size());
  for (const auto& r : cal) scores.push_back(std::max(r.q_lo - r.y_true, r.y_true - r.q_hi));
  CqrCalibration out;
  out.s_hat = conformal_quantile(scores, alpha);
  out.n_cal = cal.size();
  out.alpha = alpha.value();
  out.bounds = bounds;
  return out;
}

Interval predict_cqr(double q_lo, double q_hi, const CqrCalibration& calib) {
  if (std::isinf(calib.s_hat)) {
    if (!calib.bounds) {
      throw error(errc::unbounded_interval,
                  "predict_cqr: threshold is infinite and no target bounds are set");
    }
    return Interval(calib.bounds->min, calib.bounds->max);
  }
  double lo = q_lo - calib.s_hat;
  double hi = q_hi + calib.s_hat;
  if (lo > hi) {
    const double mid = (lo + hi) / 2.0;
    lo = hi = mid;
  }
  return clip_interval(Interval(lo, hi), calib.bounds);
}

Interval predict_qr_raw(const QuantilePredictionRecord& rec,
                        const std::optional<TargetBounds>& bounds, bool* crossed) {
  double lo = rec.q_lo;
  double hi = rec.q_hi;
  const bool did_cross = lo > hi;
  if (did_cross) {
    const double mid = (lo + hi) / 2.0;
    lo = hi = mid;
  }
  if (crossed) *crossed = did_cross;
  return clip_interval(Interval(lo, hi), bounds);
}

Interval gaussian_interval(const GaussianPredictionRecord& rec, Alpha alpha,
                           const std::optional<TargetBounds>& bounds) {
  if (rec.sigma < 0.0) {
    throw error(errc::invalid_argument, "gaussian_interval: sigma must be >= 0");
  }
  const double z = gaussian_two_sided_z(alpha);
  return clip_interval(Interval(rec.mu - z * rec.sigma, rec.mu + z * rec.sigma), bounds);
}

}  // namespace cdpcal
