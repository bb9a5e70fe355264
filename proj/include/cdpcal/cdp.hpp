#pragma once

#include <optional>
#include <vector>

#include "cdpcal/core.hpp"

namespace cdpcal {

/// Frozen result of split-conformal calibration on absolute residuals:
/// everything predict time needs.
struct CdpCalibration {
  double s_hat = 0.0;  // residual threshold; may be +infinity
  std::size_t n_cal = 0;
  double alpha = 0.0;
  std::optional<TargetBounds> bounds;
};

/// Calibrate on absolute residuals |y - y_hat|. s_hat is the finite-sample
/// conformal quantile; +infinity when the calibration set is too small for
/// the requested alpha.
CdpCalibration calibrate_cdp(const std::vector<PredictionRecord>& cal, Alpha alpha,
                             const std::optional<TargetBounds>& bounds);

/// Symmetric interval [y_hat - s_hat, y_hat + s_hat], clamped to bounds.
/// The +infinity sentinel widens to full bounds; without bounds it has no
/// finite answer and throws.
Interval predict_cdp(double y_hat, const CdpCalibration& calib);

}  // namespace cdpcal
