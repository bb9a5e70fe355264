#pragma once

#include <optional>
#include <vector>

#include "cdpcal/core.hpp"

namespace cdpcal {

/// Inverse of the Gaussian error function on (-1, 1), accurate to better
/// than 1e-9 in erf space: a rational initial approximation refined by
/// guarded Newton steps against erf itself.
double inverse_erf(double x);

/// Two-sided Gaussian quantile factor z with P(|Z| <= z) = 1 - alpha,
/// i.e. sqrt(2) * inverse_erf(1 - alpha).
double gaussian_two_sided_z(Alpha alpha);

/// Calibration state for conformalized quantile regression. Unlike the
/// residual method, s_hat may be negative: raw quantile pairs that already
/// overcover get shrunk instead of widened.
struct CqrCalibration {
  double s_hat = 0.0;  // may be negative or +infinity
  std::size_t n_cal = 0;
  double alpha = 0.0;
  std::optional<TargetBounds> bounds;
};

/// Calibrate on signed quantile-gap scores max(q_lo - y, y - q_hi).
CqrCalibration calibrate_cqr(const std::vector<QuantilePredictionRecord>& cal, Alpha alpha,
                             const std::optional<TargetBounds>& bounds);

/// Shift raw quantiles outward by s_hat: [q_lo - s_hat, q_hi + s_hat],
/// clamped to bounds. Endpoints crossed by a negative shift collapse to
/// their midpoint.
Interval predict_cqr(double q_lo, double q_hi, const CqrCalibration& calib);

/// Uncalibrated quantile-pair interval. Crossed pairs collapse to the
/// midpoint; *crossed (when non-null) reports whether that happened so
/// callers can accumulate a crossing-rate diagnostic.
Interval predict_qr_raw(const QuantilePredictionRecord& rec,
                        const std::optional<TargetBounds>& bounds, bool* crossed = nullptr);

/// Central interval of the predicted normal: mu +- z * sigma, clamped.
Interval gaussian_interval(const GaussianPredictionRecord& rec, Alpha alpha,
                           const std::optional<TargetBounds>& bounds);

}  // namespace cdpcal
