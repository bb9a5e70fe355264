#include "cdpcal/acc.hpp"

#include <algorithm>
#include <cmath>

#include "cdpcal/rng.hpp"

namespace cdpcal {

int BinPartition::locate(double y_hat) const {
  auto it = std::upper_bound(edges.begin(), edges.end(), y_hat);
  int idx = static_cast<int>(it - edges.begin()) - 1;
  return std::clamp(idx, 0, M - 1);
}

double ConditionalHistogram::cell_edge(int j) const {
  if (j <= 0) return support_lo;
  if (j >= K) return support_hi;
  return support_lo + (support_hi - support_lo) * static_cast<double>(j) / K;
}

PartitionResult partition_predictions(const std::vector<PredictionRecord>& cal, double L,
                                      double U, int M) {
  if (!(std::isfinite(L) && std::isfinite(U) && L < U) || M < 1) {
    throw error(errc::invalid_partition, "partition requires finite L < U and M >= 1");
  }
  if (cal.empty()) {
    throw error(errc::empty_calibration, "partition_predictions: empty calibration set");
  }
  PartitionResult out;
  out.partition.L = L;
  out.partition.U = U;
  out.partition.M = M;
  out.partition.edges.resize(M + 1);
  for (int m = 0; m <= M; ++m) {
    out.partition.edges[m] = L + (U - L) * static_cast<double>(m) / M;
  }
  out.bin_labels.assign(M, {});
  for (const auto& r : cal) {
    out.bin_labels[out.partition.locate(r.y_pred)].push_back(r.y_true);
  }
  return out;
}

namespace {

std::vector<double> jitter(const std::vector<double>& labels, double tie_noise,
                           SplitMix64& rng) {
  std::vector<double> out(labels);
  if (tie_noise > 0.0) {
    for (auto& v : out) v += (2.0 * rng.next_double() - 1.0) * tie_noise;
  }
  return out;
}

}  // namespace

ConditionalHistogram fit_conditional_histogram(const std::vector<double>& labels, int K,
                                               double tie_noise, std::uint64_t seed) {
  if (labels.empty()) {
    throw error(errc::empty_bin, "fit_conditional_histogram: no labels");
  }
  if (K < 1) {
    throw error(errc::invalid_partition, "fit_conditional_histogram: K must be >= 1");
  }
  SplitMix64 rng(seed);
  const std::vector<double> pts = jitter(labels, tie_noise, rng);

  auto [lo_it, hi_it] = std::minmax_element(pts.begin(), pts.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(std::isfinite(lo) && std::isfinite(hi))) {
    throw error(errc::non_finite_value, "fit_conditional_histogram: non-finite label");
  }
  if (lo == hi) {
    const double eps = 1e-9 * std::max(1.0, std::abs(lo));
    lo -= eps;
    hi += eps;
  }

  ConditionalHistogram hist;
  hist.support_lo = lo;
  hist.support_hi = hi;
  hist.K = K;

  std::vector<std::size_t> counts(K, 0);
  const double span = hi - lo;
  for (double v : pts) {
    int j = static_cast<int>((v - lo) / span * K);
    j = std::clamp(j, 0, K - 1);  // hi lands in the last (closed) cell
    ++counts[j];
  }
  // CDF from integer prefix sums so cdf[K] is exactly 1; mass is defined as
  // adjacent CDF differences so the two stay consistent bit-for-bit.
  hist.cdf.resize(K + 1);
  hist.cdf[0] = 0.0;
  std::size_t cum = 0;
  for (int j = 0; j < K; ++j) {
    cum += counts[j];
    hist.cdf[j + 1] = static_cast<double>(cum) / static_cast<double>(pts.size());
  }
  hist.mass.resize(K);
  for (int j = 0; j < K; ++j) hist.mass[j] = hist.cdf[j + 1] - hist.cdf[j];
  return hist;
}

Interval shortest_covering_interval(const ConditionalHistogram& hist, double tau, double y) {
  if (y < hist.support_lo || y > hist.support_hi) {
    throw error(errc::out_of_support, "shortest_covering_interval: y outside histogram support");
  }
  const int K = hist.K;
  for (int d = 1; d <= K; ++d) {
    for (int a = 0; a + d <= K; ++a) {
      const int b = a + d;
      if (hist.cell_edge(a) <= y && y <= hist.cell_edge(b) &&
          hist.cdf[b] - hist.cdf[a] >= tau) {
        return Interval(hist.cell_edge(a), hist.cell_edge(b));
      }
    }
  }
  return Interval(hist.support_lo, hist.support_hi);
}

double conformal_score_acc(const ConditionalHistogram& hist, Alpha alpha, double y) {
  return shortest_covering_interval(hist, 1.0 - alpha.value(), y).width();
}

Interval bin_interval(const ConditionalHistogram& hist, double s_hat_m, Alpha alpha) {
  int first = -1;
  int last = -1;
  for (int j = 0; j < hist.K; ++j) {
    const double mid = (hist.cell_edge(j) + hist.cell_edge(j + 1)) / 2.0;
    if (conformal_score_acc(hist, alpha, mid) <= s_hat_m) {
      if (first < 0) first = j;
      last = j;
    }
  }
  if (first < 0) return Interval(hist.support_lo, hist.support_hi);
  return Interval(hist.cell_edge(first), hist.cell_edge(last + 1));
}

Interval nested_covering_interval(const ConditionalHistogram& hist, double tau, double y) {
  if (y < hist.support_lo || y > hist.support_hi) {
    throw error(errc::out_of_support, "nested_covering_interval: y outside histogram support");
  }
  const int K = hist.K;
  int a = std::clamp(static_cast<int>((y - hist.support_lo) /
                                      (hist.support_hi - hist.support_lo) * K),
                     0, K - 1);
  int b = a + 1;
  while (hist.cdf[b] - hist.cdf[a] < tau && (a > 0 || b < K)) {
    const double left_gain = a > 0 ? hist.cdf[a] - hist.cdf[a - 1] : -1.0;
    const double right_gain = b < K ? hist.cdf[b + 1] - hist.cdf[b] : -1.0;
    if (a > 0 && left_gain >= right_gain) {
      --a;
    } else {
      ++b;
    }
  }
  return Interval(hist.cell_edge(a), hist.cell_edge(b));
}

AccCalibration calibrate_cdp_acc(const std::vector<PredictionRecord>& cal, Alpha alpha, int M,
                                 int K, double L, double U,
                                 const std::optional<TargetBounds>& bounds, std::size_t n_min,
                                 std::uint64_t seed) {
  if (cal.empty()) {
    throw error(errc::empty_calibration, "calibrate_cdp_acc: empty calibration set");
  }
  if (K < 1) {
    throw error(errc::invalid_partition, "calibrate_cdp_acc: K must be >= 1");
  }
  PartitionResult parts = partition_predictions(cal, L, U, M);

  AccCalibration out;
  out.partition = std::move(parts.partition);
  out.fallback = calibrate_cdp(cal, alpha, bounds);
  out.alpha = alpha.value();
  out.K = K;
  out.n_min = n_min;
  out.seed = seed;
  out.bounds = bounds;
  out.per_bin.resize(M);

  for (int m = 0; m < M; ++m) {
    const auto& labels = parts.bin_labels[m];
    AccBin& bin = out.per_bin[m];
    bin.n = labels.size();
    if (bin.n < n_min || bin.n == 0) {
      bin.fallback = true;
      continue;
    }
    SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(m) + 1));
    auto [lo_it, hi_it] = std::minmax_element(labels.begin(), labels.end());
    const double noise = kTieNoiseScale * (*hi_it - *lo_it);
    const std::vector<double> noisy = jitter(labels, noise, rng);
    const ConditionalHistogram hist = fit_conditional_histogram(noisy, K, 0.0, 0);
    std::vector<double> scores;
    scores.reserve(noisy.size());
    for (double y : noisy) scores.push_back(conformal_score_acc(hist, alpha, y));
    bin.s_hat = conformal_quantile(scores, alpha);
    if (std::isinf(bin.s_hat)) {
      bin.interval = bounds ? Interval(bounds->min, bounds->max)
                            : Interval(hist.support_lo, hist.support_hi);
    } else {
      bin.interval = clip_interval(bin_interval(hist, bin.s_hat, alpha), bounds);
    }
  }
  return out;
}

Interval predict_cdp_acc(double y_hat, const AccCalibration& calib) {
  const int m = calib.partition.locate(std::clamp(y_hat, calib.partition.L, calib.partition.U));
  const AccBin& bin = calib.per_bin[m];
  if (bin.fallback) return predict_cdp(y_hat, calib.fallback);
  return bin.interval;
}

}  // namespace cdpcal
