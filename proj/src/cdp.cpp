#include "cdpcal/cdp.hpp"

#include <cmath>

namespace cdpcal {

CdpCalibration calibrate_cdp(const std::vector<PredictionRecord>& cal, Alpha alpha,
                             const std::optional<TargetBounds>& bounds) {
  if (cal.empty()) {
    throw error(errc::empty_calibration, "calibrate_cdp: empty calibration set");
  }
  std::vector<double> scores;
  scores.reserve(cal.size());
  for (const auto& r : cal) scores.push_back(std::abs(r.y_true - r.y_pred));
  CdpCalibration out;
  out.s_hat = conformal_quantile(scores, alpha);
  out.n_cal = cal.size();
  out.alpha = alpha.value();
  out.bounds = bounds;
  return out;
}

Interval predict_cdp(double y_hat, const CdpCalibration& calib) {
  if (std::isinf(calib.s_hat)) {
    if (!calib.bounds) {
      throw error(errc::unbounded_interval,
                  "predict_cdp: threshold is infinite and no target bounds are set");
    }
    return Interval(calib.bounds->min, calib.bounds->max);
  }
  return clip_interval(Interval(y_hat - calib.s_hat, y_hat + calib.s_hat), calib.bounds);
}

}  // namespace cdpcal
