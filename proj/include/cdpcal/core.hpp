#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdpcal {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Failure conditions raised across the library. Values are stable so
/// callers (and the CLI exit-code mapping) can distinguish them.
enum class errc {
  empty_scores,
  non_finite_score,
  empty_calibration,
  unbounded_interval,
  invalid_partition,
  empty_bin,
  out_of_support,
  length_mismatch,
  empty_input,
  invalid_spec,
  invalid_fraction,
  file_not_found,
  missing_column,
  malformed_row,
  non_finite_value,
  io_error,
  incompatible_artifact,
  data_mismatch,
  domain_error,
  invalid_argument,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

/// Miscoverage rate, strictly inside (0, 1).
class Alpha {
 public:
  explicit Alpha(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo, double hi);

  double width() const noexcept { return hi - lo; }
  bool contains(double y) const noexcept { return lo <= y && y <= hi; }
};

/// Valid range of the regression target, e.g. [0, 63] for severity scores.
struct TargetBounds {
  double min;
  double max;

  TargetBounds(double min, double max);
};

/// One (label, point prediction) observation. Fields are expected finite;
/// ingestion and generation enforce this at the boundary.
struct PredictionRecord {
  double y_true = 0.0;
  double y_pred = 0.0;
};

/// Label plus a raw lower/upper quantile pair from a quantile regressor.
/// q_lo > q_hi is legal input (overconfident models cross); consumers flag it.
struct QuantilePredictionRecord {
  double y_true = 0.0;
  double q_lo = 0.0;
  double q_hi = 0.0;

  bool crossed() const noexcept { return q_lo > q_hi; }
};

/// Label plus a predicted mean/standard deviation pair.
struct GaussianPredictionRecord {
  double y_true = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
};

/// Finite-sample calibration quantile: the k-th smallest score with
/// k = ceil((N+1)(1-alpha)). Returns +infinity when k exceeds N, in which
/// case the caller must widen to full bounds. Rank-based, no interpolation,
/// so duplicate scores need no special handling.
double conformal_quantile(const std::vector<double>& scores, Alpha alpha);

/// Clamp an interval into the target bounds (identity without bounds).
/// An interval lying entirely outside collapses to the nearest bound.
Interval clip_interval(const Interval& iv, const std::optional<TargetBounds>& bounds);

}  // namespace cdpcal
