#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cdpcal/cdp.hpp"
#include "cdpcal/core.hpp"

namespace cdpcal {

/// Uniform partition of the prediction range [L, U] into M subintervals.
/// Bin m (0-based) is [edges[m], edges[m+1]), the last bin closed; inputs
/// outside [L, U] clamp to the edge bins.
struct BinPartition {
  double L = 0.0;
  double U = 0.0;
  int M = 0;
  std::vector<double> edges;  // M+1 entries, edges[0]=L, edges[M]=U

  /// 0-based bin index for a prediction, applying the clamp rule.
  int locate(double y_hat) const;
};

/// Discretized estimate of the label distribution within one prediction
/// bin: K uniform cells over the observed label support, with exact
/// prefix-sum CDF (cdf[0]=0, cdf[K]=1; mass[j] = cdf[j+1]-cdf[j]).
///
/// Replayable arithmetic, pinned because artifacts serialize the results:
///   cell_edge(j) = support_lo + (support_hi - support_lo) * j / K,
///                  with edges 0 and K returning the support ends exactly;
///   a label v lands in cell floor((v - support_lo) / span * K), clamped
///                  to [0, K-1] so the top edge joins the last cell;
///   cdf[j]       = (labels in cells < j) / n, an integer count over n.
struct ConditionalHistogram {
  double support_lo = 0.0;
  double support_hi = 0.0;
  int K = 0;
  std::vector<double> mass;  // K entries
  std::vector<double> cdf;   // K+1 entries

  double cell_edge(int j) const;  // j in [0, K]
};

struct AccBin {
  std::size_t n = 0;      // calibration samples in the bin
  bool fallback = false;  // true when n < n_min: predict uses global CDP
  double s_hat = 0.0;     // per-bin width threshold; may be +infinity
  Interval interval;      // stored answer for every prediction in the bin
};

/// Frozen result of per-bin calibration. Holds one precomputed interval per
/// dense bin plus a global residual calibration used by sparse bins.
struct AccCalibration {
  BinPartition partition;
  std::vector<AccBin> per_bin;  // M entries
  CdpCalibration fallback;
  double alpha = 0.0;
  int K = 0;
  std::size_t n_min = 0;
  std::uint64_t seed = 0;
  std::optional<TargetBounds> bounds;
};

struct PartitionResult {
  BinPartition partition;
  std::vector<std::vector<double>> bin_labels;  // M entries, file order within bin
};

/// Place each calibration label in the bin of its prediction.
PartitionResult partition_predictions(const std::vector<PredictionRecord>& cal, double L,
                                      double U, int M);

/// Histogram over K uniform cells spanning [min(labels), max(labels)].
/// When tie_noise > 0, each label gains (2u - 1) * tie_noise with u the
/// next SplitMix64(seed) double, one draw per label in input order; the
/// support is taken over the noisy labels. A degenerate support is widened
/// to [lo - eps, lo + eps] with eps = 1e-9 * max(1, |lo|).
ConditionalHistogram fit_conditional_histogram(const std::vector<double>& labels, int K,
                                               double tie_noise, std::uint64_t seed);

/// Shortest cell-edge-aligned closed interval containing y with CDF mass
/// >= tau. Cells are uniform, so "shortest" is the smallest cell span;
/// ties break toward the lowest left endpoint. Falls back to full support
/// if rounding leaves no qualifying interval.
Interval shortest_covering_interval(const ConditionalHistogram& hist, double tau, double y);

/// Width of the shortest covering interval at mass 1 - alpha: the
/// nonconformity score of label y under this bin's distribution.
double conformal_score_acc(const ConditionalHistogram& hist, Alpha alpha, double y);

/// Interval hull of the score sub-level set {y : score(y) <= s_hat_m},
/// evaluated at cell midpoints (the score is constant on cell interiors).
/// No qualifying cell means full support.
Interval bin_interval(const ConditionalHistogram& hist, double s_hat_m, Alpha alpha);

/// Per-bin calibration pipeline. For each bin with n >= n_min:
///   1. rng = SplitMix64(SplitMix64::derive(seed, m + 1)) for 0-based bin m;
///   2. labels jittered by (2u - 1) * tie_noise per label in input order,
///      tie_noise = 1e-6 * (bin label span), a no-op when the span is 0;
///   3. histogram fit over the noisy labels (K cells, no further noise);
///   4. per-sample scores of the noisy labels, threshold via the
///      finite-sample quantile at the bin's own n;
///   5. stored interval = bin_interval clamped to bounds, or full bounds
///      (full support without bounds) when the threshold is infinite.
/// Sparse bins are marked fallback; a global residual calibration over the
/// whole set serves them. Deterministic in (inputs, seed).
AccCalibration calibrate_cdp_acc(const std::vector<PredictionRecord>& cal, Alpha alpha, int M,
                                 int K, double L, double U,
                                 const std::optional<TargetBounds>& bounds, std::size_t n_min,
                                 std::uint64_t seed);

/// Look up the precomputed interval of the bin containing y_hat (clamped
/// into [L, U] for the lookup only); fallback bins answer with the global
/// residual interval centered at the original y_hat.
Interval predict_cdp_acc(double y_hat, const AccCalibration& calib);

/// Variant of shortest_covering_interval that grows outward from the cell
/// containing y, one cell at a time toward the side adding more mass (ties
/// extend left). Produces intervals nested in tau, unlike the literal
/// shortest-width rule; kept for comparison and not used by calibration.
Interval nested_covering_interval(const ConditionalHistogram& hist, double tau, double y);

constexpr double kTieNoiseScale = 1e-6;
constexpr std::size_t kDefaultNMin = 10;

}  // namespace cdpcal
