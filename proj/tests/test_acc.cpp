#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "cdpcal/acc.hpp"
#include "cdpcal/io.hpp"
#include "cdpcal/rng.hpp"
#include "cdpcal/synth.hpp"
#include "support/oracles.hpp"

using namespace cdpcal;

namespace {

// histogram with hand-chosen cell masses: n unit cells on [0, n]
ConditionalHistogram make_hist(const std::vector<double>& mass) {
  ConditionalHistogram h;
  h.K = static_cast<int>(mass.size());
  h.support_lo = 0.0;
  h.support_hi = static_cast<double>(h.K);
  h.mass = mass;
  h.cdf.assign(h.K + 1, 0.0);
  for (int j = 0; j < h.K; ++j) h.cdf[j + 1] = h.cdf[j] + mass[j];
  h.cdf[h.K] = 1.0;
  return h;
}

ConditionalHistogram random_hist(SplitMix64& rng, int max_cells) {
  const int K = 1 + static_cast<int>(rng.next_u64() % max_cells);
  const std::size_t n = 1 + rng.next_u64() % 200;
  std::vector<std::size_t> counts(K, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[rng.next_u64() % K];
  ConditionalHistogram h;
  h.K = K;
  h.support_lo = rng.uniform(-20.0, 0.0);
  h.support_hi = h.support_lo + rng.uniform(0.5, 40.0);
  h.cdf.assign(K + 1, 0.0);
  std::size_t cum = 0;
  for (int j = 0; j < K; ++j) {
    cum += counts[j];
    h.cdf[j + 1] = static_cast<double>(cum) / static_cast<double>(n);
  }
  h.mass.resize(K);
  for (int j = 0; j < K; ++j) h.mass[j] = h.cdf[j + 1] - h.cdf[j];
  return h;
}

std::vector<double> all_edges(const ConditionalHistogram& h) {
  std::vector<double> e(h.K + 1);
  for (int j = 0; j <= h.K; ++j) e[j] = h.cell_edge(j);
  return e;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("uniform partition with clamped lookup") {
  const auto parts = partition_predictions({{1.0, 4.5}, {2.0, 63.0}, {3.0, -1.0}}, 0.0, 63.0, 14);
  const BinPartition& p = parts.partition;
  REQUIRE(p.edges.size() == 15);
  CHECK(p.edges[0] == 0.0);
  CHECK(p.edges[1] == 4.5);
  CHECK(p.edges[2] == 9.0);
  CHECK(p.edges[14] == 63.0);
  // 4.5 sits on the first interior edge: half-open rule puts it in bin 2
  CHECK(p.locate(4.5) == 1);
  CHECK(p.locate(63.0) == 13);  // last bin is closed
  CHECK(p.locate(-1.0) == 0);   // clamped below
  CHECK(p.locate(99.0) == 13);  // clamped above
  CHECK(parts.bin_labels[1] == std::vector<double>{1.0});
  CHECK(parts.bin_labels[13] == std::vector<double>{2.0});
  CHECK(parts.bin_labels[0] == std::vector<double>{3.0});
}

TEST_CASE("partition rejects bad geometry and empty input") {
  CHECK_THROWS_AS(partition_predictions({{1, 1}}, 5.0, 5.0, 4), error);
  CHECK_THROWS_AS(partition_predictions({{1, 1}}, 9.0, 2.0, 4), error);
  CHECK_THROWS_AS(partition_predictions({{1, 1}}, 0.0, 63.0, 0), error);
  CHECK_THROWS_AS(partition_predictions({}, 0.0, 63.0, 4), error);
  try {
    partition_predictions({{1, 1}}, 5.0, 5.0, 4);
  } catch (const error& e) {
    CHECK(e.code() == errc::invalid_partition);
  }
}

TEST_CASE("histogram over evenly spread labels") {
  const ConditionalHistogram h = fit_conditional_histogram({0, 1, 2, 3}, 4, 0.0, 0);
  CHECK(h.support_lo == 0.0);
  CHECK(h.support_hi == 3.0);
  REQUIRE(h.mass.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(h.mass[j] == 0.25);
  CHECK(h.cdf[0] == 0.0);
  CHECK(h.cdf[4] == 1.0);
}

TEST_CASE("identical labels widen to a degenerate-support histogram") {
  const ConditionalHistogram h = fit_conditional_histogram({2, 2, 2}, 4, 0.0, 0);
  CHECK(h.support_lo < 2.0);
  CHECK(h.support_hi > 2.0);
  CHECK(std::abs((h.support_hi - h.support_lo) - 4e-9) < 1e-12);
  // the labels sit at the middle of the widened support; which of the two
  // central cells they join is a rounding detail, the mass must stay there
  CHECK(h.mass[1] + h.mass[2] == 1.0);
  CHECK(h.cdf[4] == 1.0);
}

TEST_CASE("histogram cdf is a nondecreasing staircase ending at one") {
  SplitMix64 rng(314);
  for (int trial = 0; trial < 1000; ++trial) {
    const int K = 1 + static_cast<int>(rng.next_u64() % 24);
    const std::size_t n = 1 + rng.next_u64() % 60;
    std::vector<double> labels(n);
    for (auto& v : labels) v = rng.uniform(-5.0, 5.0);
    const ConditionalHistogram h = fit_conditional_histogram(labels, K, 0.0, 0);
    CHECK(h.cdf[0] == 0.0);
    CHECK(h.cdf[K] == 1.0);
    for (int j = 0; j < K; ++j) {
      CHECK(h.cdf[j] <= h.cdf[j + 1]);
      CHECK(h.mass[j] == h.cdf[j + 1] - h.cdf[j]);
    }
  }
  CHECK_THROWS_AS(fit_conditional_histogram({}, 4, 0.0, 0), error);
  CHECK_THROWS_AS(fit_conditional_histogram({1.0}, 0, 0.0, 0), error);
}

TEST_CASE("tie-break noise is seeded and bounded") {
  const std::vector<double> labels = {1, 1, 2, 2, 3};
  const ConditionalHistogram a = fit_conditional_histogram(labels, 8, 0.01, 99);
  const ConditionalHistogram b = fit_conditional_histogram(labels, 8, 0.01, 99);
  const ConditionalHistogram c = fit_conditional_histogram(labels, 8, 0.01, 100);
  CHECK(a.support_lo == b.support_lo);
  CHECK(a.cdf == b.cdf);
  CHECK(a.support_lo != c.support_lo);  // different stream moves the support
  CHECK(a.support_lo >= 1.0 - 0.01);
  CHECK(a.support_hi <= 3.0 + 0.01);
}

TEST_CASE("shortest covering interval on pinned histograms") {
  SUBCASE("mass concentrated left and middle") {
    const ConditionalHistogram h = make_hist({0.4, 0.05, 0.4, 0.15});
    const Interval iv = shortest_covering_interval(h, 0.4, 0.5);
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi == 1.0);
  }
  SUBCASE("uniform mass ties break toward the lowest left endpoint") {
    const ConditionalHistogram h = make_hist(std::vector<double>(10, 0.1));
    const Interval iv = shortest_covering_interval(h, 0.5, 5.0);
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi == 5.0);
  }
  SUBCASE("single loaded cell answers every level") {
    const ConditionalHistogram h = make_hist({0.0, 1.0, 0.0});
    for (double tau : {0.2, 0.9, 1.0}) {
      const Interval iv = shortest_covering_interval(h, tau, 1.5);
      CHECK(iv.lo == 1.0);
      CHECK(iv.hi == 2.0);
    }
  }
  SUBCASE("outside the support is an error") {
    const ConditionalHistogram h = make_hist({0.5, 0.5});
    CHECK_THROWS_AS(shortest_covering_interval(h, 0.5, -0.1), error);
    try {
      shortest_covering_interval(h, 0.5, 2.1);
    } catch (const error& e) {
      CHECK(e.code() == errc::out_of_support);
    }
  }
}

TEST_CASE("shortest covering interval matches exhaustive edge-pair search") {
  SplitMix64 rng(271828);
  const double taus[] = {0.5, 0.8, 0.9, 0.95};
  for (int trial = 0; trial < 1000; ++trial) {
    const ConditionalHistogram h = random_hist(rng, 32);
    const double tau = taus[trial % 4];
    const double y = rng.uniform(h.support_lo, h.support_hi);
    const Interval got = shortest_covering_interval(h, tau, y);
    const auto want = oracles::shortest_interval_brute(all_edges(h), h.cdf, tau, y);
    REQUIRE(want.a >= 0);  // tau <= 1 is always achievable by the full support
    CHECK(got.lo == h.cell_edge(want.a));
    CHECK(got.hi == h.cell_edge(want.b));
  }
}

TEST_CASE("interval width as the nonconformity score") {
  SUBCASE("uniform histogram at one-half mass") {
    const ConditionalHistogram h = make_hist(std::vector<double>(10, 0.1));
    CHECK(conformal_score_acc(h, Alpha(0.5), 5.0) == 5.0);
  }
  SUBCASE("point-mass histogram scores one cell width") {
    const ConditionalHistogram h = make_hist({0.0, 1.0, 0.0});
    CHECK(conformal_score_acc(h, Alpha(0.3), 1.5) == 1.0);
  }
  SUBCASE("score is constant within a cell of a symmetric histogram") {
    const ConditionalHistogram h = make_hist({0.5, 0.5});
    const double s = conformal_score_acc(h, Alpha(0.6), 0.1);
    CHECK(conformal_score_acc(h, Alpha(0.6), 0.5) == s);
    CHECK(conformal_score_acc(h, Alpha(0.6), 0.9) == s);
  }
  SUBCASE("score never shrinks as the required mass grows") {
    SplitMix64 rng(55);
    for (int trial = 0; trial < 50; ++trial) {
      const ConditionalHistogram h = random_hist(rng, 16);
      const double y = rng.uniform(h.support_lo, h.support_hi);
      double prev = 0.0;
      for (double alpha : {0.9, 0.7, 0.5, 0.3, 0.1, 0.05}) {
        const double s = conformal_score_acc(h, Alpha(alpha), y);
        CHECK(s >= prev);
        prev = s;
      }
    }
  }
}

TEST_CASE("sub-level hull of the score function") {
  SUBCASE("pinned example") {
    const ConditionalHistogram h = make_hist({0.4, 0.05, 0.4, 0.15});
    const Interval iv = bin_interval(h, 3.0, Alpha(0.2));
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi == 3.0);
  }
  SUBCASE("threshold above the support width keeps everything") {
    const ConditionalHistogram h = make_hist(std::vector<double>(5, 0.2));
    const Interval iv = bin_interval(h, 5.0, Alpha(0.1));
    CHECK(iv.lo == h.support_lo);
    CHECK(iv.hi == h.support_hi);
  }
  SUBCASE("threshold below every score falls back to the full support") {
    const ConditionalHistogram h = make_hist(std::vector<double>(5, 0.2));
    const Interval iv = bin_interval(h, 0.01, Alpha(0.1));
    CHECK(iv.lo == h.support_lo);
    CHECK(iv.hi == h.support_hi);
  }
  SUBCASE("hull contains every label whose score passes the threshold") {
    SplitMix64 rng(808);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> labels(60);
      for (auto& v : labels) v = rng.uniform(0.0, 10.0);
      const ConditionalHistogram h = fit_conditional_histogram(labels, 7, 0.0, 0);
      std::vector<double> scores;
      for (double v : labels) scores.push_back(conformal_score_acc(h, Alpha(0.2), v));
      const double s_hat = conformal_quantile(scores, Alpha(0.2));
      REQUIRE(std::isfinite(s_hat));
      const Interval hull = bin_interval(h, s_hat, Alpha(0.2));
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (scores[i] <= s_hat) CHECK(hull.contains(labels[i]));
      }
    }
  }
}

TEST_CASE("literal shortest-width rule is not nested, the greedy variant is") {
  // the fourth cell holds nearly half the mass: at tau=0.5 the best interval
  // hugs the left block, at tau=0.7 it must jump to cover the right block
  const ConditionalHistogram h = make_hist({0.3, 0.2, 0.05, 0.45});
  const double y = 1.5;
  const Interval lo_tau = shortest_covering_interval(h, 0.5, y);
  const Interval hi_tau = shortest_covering_interval(h, 0.7, y);
  CHECK(lo_tau.lo == 0.0);
  CHECK(lo_tau.hi == 2.0);
  CHECK(hi_tau.lo == 1.0);
  CHECK(hi_tau.hi == 4.0);
  CHECK(!(lo_tau.lo >= hi_tau.lo && lo_tau.hi <= hi_tau.hi));  // not nested

  SplitMix64 rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const ConditionalHistogram rh = random_hist(rng, 12);
    const double yy = rng.uniform(rh.support_lo, rh.support_hi);
    Interval prev(rh.support_lo, rh.support_lo);
    bool first = true;
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      const Interval iv = nested_covering_interval(rh, tau, yy);
      CHECK(iv.contains(yy));
      if (!first) {
        CHECK(iv.lo <= prev.lo);
        CHECK(iv.hi >= prev.hi);
      }
      prev = iv;
      first = false;
    }
  }
}

TEST_CASE("per-bin calibration replays the straight-line reference exactly") {
  const auto records = generate_scenario(scenario_by_name("heteroscedastic-v1", 200, 7));

  SUBCASE("bounded") {
    const AccCalibration got = calibrate_cdp_acc(records, Alpha(0.1), 4, 16, 0.0, 63.0,
                                                 TargetBounds(0.0, 63.0), 10, 7);
    const auto want = oracles::calibrate_acc_replay(records, 0.1, 4, 16, 0.0, 63.0,
                                                    std::make_pair(0.0, 63.0), 10, 7);
    REQUIRE(got.per_bin.size() == want.bins.size());
    CHECK(got.fallback.s_hat == want.fallback_s_hat);
    for (std::size_t m = 0; m < want.bins.size(); ++m) {
      CHECK(got.per_bin[m].n == want.bins[m].n);
      CHECK(got.per_bin[m].fallback == want.bins[m].fallback);
      if (!want.bins[m].fallback) {
        CHECK(got.per_bin[m].s_hat == want.bins[m].s_hat);
        CHECK(got.per_bin[m].interval.lo == want.bins[m].lo);
        CHECK(got.per_bin[m].interval.hi == want.bins[m].hi);
      }
    }
  }
  SUBCASE("unbounded") {
    const AccCalibration got =
        calibrate_cdp_acc(records, Alpha(0.1), 4, 16, 0.0, 63.0, std::nullopt, 10, 7);
    const auto want =
        oracles::calibrate_acc_replay(records, 0.1, 4, 16, 0.0, 63.0, std::nullopt, 10, 7);
    for (std::size_t m = 0; m < want.bins.size(); ++m) {
      CHECK(got.per_bin[m].fallback == want.bins[m].fallback);
      if (!want.bins[m].fallback) {
        CHECK(got.per_bin[m].s_hat == want.bins[m].s_hat);
        CHECK(got.per_bin[m].interval.lo == want.bins[m].lo);
        CHECK(got.per_bin[m].interval.hi == want.bins[m].hi);
      }
    }
  }
  SUBCASE("sparse bins fall back, and the replay agrees on which") {
    // skewed predictions leave upper bins nearly empty at M=8
    const auto skewed = generate_scenario(scenario_by_name("imbalanced-skew-v1", 120, 3));
    const AccCalibration got = calibrate_cdp_acc(skewed, Alpha(0.1), 8, 12, 0.0, 63.0,
                                                 TargetBounds(0.0, 63.0), 10, 3);
    const auto want = oracles::calibrate_acc_replay(skewed, 0.1, 8, 12, 0.0, 63.0,
                                                    std::make_pair(0.0, 63.0), 10, 3);
    bool any_fallback = false;
    for (std::size_t m = 0; m < want.bins.size(); ++m) {
      CHECK(got.per_bin[m].fallback == want.bins[m].fallback);
      CHECK(got.per_bin[m].n == want.bins[m].n);
      any_fallback = any_fallback || want.bins[m].fallback;
      if (!want.bins[m].fallback) {
        CHECK(got.per_bin[m].s_hat == want.bins[m].s_hat);
        CHECK(got.per_bin[m].interval.lo == want.bins[m].lo);
        CHECK(got.per_bin[m].interval.hi == want.bins[m].hi);
      }
    }
    CHECK(any_fallback);  // the scenario must actually exercise the fallback
  }
}

TEST_CASE("single-bin calibration reduces to the unconditional histogram") {
  const auto records = generate_scenario(scenario_by_name("homoscedastic-v1", 150, 21));
  const std::uint64_t seed = 21;
  const AccCalibration calib =
      calibrate_cdp_acc(records, Alpha(0.1), 1, 16, 0.0, 63.0, std::nullopt, 10, seed);
  REQUIRE(calib.per_bin.size() == 1);
  REQUIRE(!calib.per_bin[0].fallback);

  // reproduce the single bin by hand: same jitter stream, same histogram,
  // same threshold over the global label set
  std::vector<double> labels;
  for (const auto& r : records) labels.push_back(r.y_true);
  double lo = labels[0];
  double hi = labels[0];
  for (double v : labels) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  SplitMix64 rng(SplitMix64::derive(seed, 1));
  std::vector<double> noisy(labels);
  const double noise = kTieNoiseScale * (hi - lo);
  for (auto& v : noisy) v += (2.0 * rng.next_double() - 1.0) * noise;
  const ConditionalHistogram h = fit_conditional_histogram(noisy, 16, 0.0, 0);
  std::vector<double> scores;
  for (double v : noisy) scores.push_back(conformal_score_acc(h, Alpha(0.1), v));
  const double s_hat = conformal_quantile(scores, Alpha(0.1));
  const Interval iv = bin_interval(h, s_hat, Alpha(0.1));

  CHECK(calib.per_bin[0].s_hat == s_hat);
  CHECK(calib.per_bin[0].interval.lo == iv.lo);
  CHECK(calib.per_bin[0].interval.hi == iv.hi);
  // every prediction lands in the one bin
  CHECK(predict_cdp_acc(3.0, calib).lo == iv.lo);
  CHECK(predict_cdp_acc(55.0, calib).lo == iv.lo);
}

TEST_CASE("per-bin threshold sentinel widens to bounds or support") {
  // 10 records in one bin at alpha=0.05: k = ceil(11*0.95) = 11 > 10
  std::vector<PredictionRecord> cal;
  for (int i = 0; i < 10; ++i) cal.push_back({static_cast<double>(i), 5.0});
  const AccCalibration bounded = calibrate_cdp_acc(cal, Alpha(0.05), 1, 4, 0.0, 10.0,
                                                   TargetBounds(0.0, 63.0), 10, 1);
  REQUIRE(std::isinf(bounded.per_bin[0].s_hat));
  CHECK(bounded.per_bin[0].interval.lo == 0.0);
  CHECK(bounded.per_bin[0].interval.hi == 63.0);

  const AccCalibration open =
      calibrate_cdp_acc(cal, Alpha(0.05), 1, 4, 0.0, 10.0, std::nullopt, 10, 1);
  REQUIRE(std::isinf(open.per_bin[0].s_hat));
  CHECK(open.per_bin[0].interval.lo >= -1e-3);  // noisy-label support
  CHECK(open.per_bin[0].interval.hi <= 9.0 + 1e-3);
}

TEST_CASE("prediction lookup: stored bins, clamping, and fallback") {
  const auto records = generate_scenario(scenario_by_name("heteroscedastic-v1", 400, 9));
  const AccCalibration calib = calibrate_cdp_acc(records, Alpha(0.1), 14, 16, 0.0, 63.0,
                                                 TargetBounds(0.0, 63.0), 10, 9);
  REQUIRE(!calib.per_bin[1].fallback);
  const Interval bin2 = calib.per_bin[1].interval;
  // 6 is inside [4.5, 9): bin 2 of 14 over [0, 63]
  CHECK(predict_cdp_acc(6.0, calib).lo == bin2.lo);
  CHECK(predict_cdp_acc(6.0, calib).hi == bin2.hi);
  // out-of-range prediction clamps to the last bin
  REQUIRE(!calib.per_bin[13].fallback);
  CHECK(predict_cdp_acc(80.0, calib).lo == calib.per_bin[13].interval.lo);

  // sparse bins answer with the residual fallback, centered at the input
  std::vector<PredictionRecord> sparse_cal = records;
  // push everything into the low half so high bins are empty
  for (auto& r : sparse_cal) r.y_pred = std::min(r.y_pred, 30.0);
  const AccCalibration sparse = calibrate_cdp_acc(sparse_cal, Alpha(0.1), 14, 16, 0.0, 63.0,
                                                  TargetBounds(0.0, 63.0), 10, 9);
  REQUIRE(sparse.per_bin[13].fallback);
  const Interval via_acc = predict_cdp_acc(60.0, sparse);
  const Interval via_cdp = predict_cdp(60.0, sparse.fallback);
  CHECK(via_acc.lo == via_cdp.lo);
  CHECK(via_acc.hi == via_cdp.hi);
}

TEST_CASE("calibration is deterministic in inputs and seed") {
  const auto records = generate_scenario(scenario_by_name("bimodal-v1", 300, 13));
  const AccCalibration a = calibrate_cdp_acc(records, Alpha(0.1), 6, 12, 0.0, 63.0,
                                             TargetBounds(0.0, 63.0), 10, 13);
  const AccCalibration b = calibrate_cdp_acc(records, Alpha(0.1), 6, 12, 0.0, 63.0,
                                             TargetBounds(0.0, 63.0), 10, 13);
  const std::string pa = "acc_det_a.txt";
  const std::string pb = "acc_det_b.txt";
  save_calibration(a, pa);
  save_calibration(b, pb);
  CHECK(slurp(pa) == slurp(pb));
  CHECK(!slurp(pa).empty());
  std::remove(pa.c_str());
  std::remove(pb.c_str());
}
