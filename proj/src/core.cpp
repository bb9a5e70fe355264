#include "cdpcal/core.hpp"

#include <algorithm>
#include <cmath>

namespace cdpcal {

Alpha::Alpha(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw error(errc::invalid_argument,
                "alpha must lie strictly inside (0, 1), got " + std::to_string(value));
  }
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw error(errc::invalid_argument, "interval requires lo <= hi and no NaN endpoints");
  }
}

TargetBounds::TargetBounds(double min_, double max_) : min(min_), max(max_) {
  if (!(std::isfinite(min) && std::isfinite(max) && min < max)) {
    throw error(errc::invalid_argument, "target bounds require finite min < max");
  }
}

double conformal_quantile(const std::vector<double>& scores, Alpha alpha) {
  if (scores.empty()) {
    throw error(errc::empty_scores, "conformal_quantile: empty score list");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw error(errc::non_finite_score, "conformal_quantile: non-finite score");
    }
  }
  const auto n = scores.size();
  const double rank = std::ceil((static_cast<double>(n) + 1.0) * (1.0 - alpha.value()));
  const auto k = static_cast<std::size_t>(rank);
  if (k > n) return kInfinity;
  std::vector<double> sorted(scores);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   sorted.end());
  return sorted[k - 1];
}

Interval clip_interval(const Interval& iv, const std::optional<TargetBounds>& bounds) {
  if (!bounds) return iv;
  const double lo = std::max(iv.lo, bounds->min);
  const double hi = std::min(iv.hi, bounds->max);
  if (lo > hi) {
    const double point = iv.hi < bounds->min ? bounds->min : bounds->max;
    return Interval(point, point);
  }
  return Interval(lo, hi);
}

}  // namespace cdpcal
