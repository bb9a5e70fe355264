#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cdpcal/core.hpp"
#include "cdpcal/rng.hpp"
#include "support/oracles.hpp"

using namespace cdpcal;

TEST_CASE("alpha accepts the open unit interval only") {
  CHECK(Alpha(0.1).value() == 0.1);
  CHECK(Alpha(0.999).value() == 0.999);
  CHECK_THROWS_AS(Alpha(0.0), error);
  CHECK_THROWS_AS(Alpha(1.0), error);
  CHECK_THROWS_AS(Alpha(-0.1), error);
  CHECK_THROWS_AS(Alpha(1.5), error);
  try {
    Alpha bad(1.5);
  } catch (const error& e) {
    CHECK(e.code() == errc::invalid_argument);
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
}

TEST_CASE("interval construction and queries") {
  const Interval iv(2.0, 5.0);
  CHECK(iv.width() == 3.0);
  CHECK(iv.contains(2.0));  // closed at both ends
  CHECK(iv.contains(5.0));
  CHECK(!iv.contains(5.0001));
  CHECK_THROWS_AS(Interval(3.0, 1.0), error);
  CHECK_THROWS_AS(Interval(std::nan(""), 1.0), error);
  CHECK_THROWS_AS(Interval(0.0, std::nan("")), error);
  CHECK(Interval(4.0, 4.0).width() == 0.0);
}

TEST_CASE("target bounds require finite min < max") {
  const TargetBounds b(0.0, 63.0);
  CHECK(b.min == 0.0);
  CHECK(b.max == 63.0);
  CHECK_THROWS_AS(TargetBounds(5.0, 5.0), error);
  CHECK_THROWS_AS(TargetBounds(7.0, 2.0), error);
  CHECK_THROWS_AS(TargetBounds(0.0, kInfinity), error);
}

TEST_CASE("conformal quantile rank rule on pinned inputs") {
  // N=9, alpha=0.1: k = ceil(10 * 0.9) = 9 -> largest value
  CHECK(conformal_quantile({1, 2, 3, 4, 5, 6, 7, 8, 9}, Alpha(0.1)) == 9.0);
  // single score, alpha=0.5: k = 1
  CHECK(conformal_quantile({5}, Alpha(0.5)) == 5.0);
  // N=3, alpha=0.05: k = ceil(4 * 0.95) = 4 > 3 -> sentinel
  CHECK(std::isinf(conformal_quantile({1, 2, 3}, Alpha(0.05))));
}

TEST_CASE("conformal quantile rejects empty and non-finite input") {
  CHECK_THROWS_AS(conformal_quantile({}, Alpha(0.1)), error);
  try {
    conformal_quantile({}, Alpha(0.1));
  } catch (const error& e) {
    CHECK(e.code() == errc::empty_scores);
  }
  CHECK_THROWS_AS(conformal_quantile({1.0, std::nan("")}, Alpha(0.1)), error);
  CHECK_THROWS_AS(conformal_quantile({1.0, kInfinity}, Alpha(0.1)), error);
  try {
    conformal_quantile({kInfinity}, Alpha(0.1));
  } catch (const error& e) {
    CHECK(e.code() == errc::non_finite_score);
  }
}

TEST_CASE("conformal quantile matches the sort-and-rank oracle on random vectors") {
  SplitMix64 rng(20240901);
  const double alphas[] = {0.01, 0.05, 0.1, 0.25, 0.5};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 500;
    std::vector<double> scores(n);
    for (auto& s : scores) s = rng.uniform(-50.0, 50.0);
    // inject duplicates so the rank rule is exercised on ties
    if (n > 3) scores[1] = scores[0];
    const double alpha = alphas[trial % 5];
    const double got = conformal_quantile(scores, Alpha(alpha));
    const double want = oracles::quantile(scores, alpha);
    CHECK(got == want);  // exact, including the +infinity sentinel
  }
}

TEST_CASE("conformal quantile is monotone nonincreasing in alpha") {
  SplitMix64 rng(7);
  std::vector<double> scores(40);
  for (auto& s : scores) s = rng.uniform(0.0, 10.0);
  double prev = kInfinity;
  for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.8}) {
    const double q = conformal_quantile(scores, Alpha(alpha));
    CHECK(q <= prev);
    prev = q;
  }
}

TEST_CASE("conformal quantile ignores score order") {
  std::vector<double> scores = {4.0, 1.0, 3.0, 3.0, 9.0, 2.0, 7.0};
  const double base = conformal_quantile(scores, Alpha(0.2));
  std::sort(scores.begin(), scores.end());
  CHECK(conformal_quantile(scores, Alpha(0.2)) == base);
  std::reverse(scores.begin(), scores.end());
  CHECK(conformal_quantile(scores, Alpha(0.2)) == base);
}

TEST_CASE("clip interval against optional bounds") {
  const TargetBounds b(0.0, 63.0);
  SUBCASE("plain clamp") {
    const Interval r = clip_interval(Interval(-2.0, 4.0), b);
    CHECK(r.lo == 0.0);
    CHECK(r.hi == 4.0);
  }
  SUBCASE("no bounds is identity") {
    const Interval r = clip_interval(Interval(7.0, 13.0), std::nullopt);
    CHECK(r.lo == 7.0);
    CHECK(r.hi == 13.0);
  }
  SUBCASE("interval entirely below collapses to the lower bound") {
    const Interval r = clip_interval(Interval(-5.0, -1.0), b);
    CHECK(r.lo == 0.0);
    CHECK(r.hi == 0.0);
  }
  SUBCASE("interval entirely above collapses to the upper bound") {
    const Interval r = clip_interval(Interval(70.0, 80.0), b);
    CHECK(r.lo == 63.0);
    CHECK(r.hi == 63.0);
  }
}

TEST_CASE("clipped intervals always satisfy the bounds") {
  const TargetBounds b(-3.0, 12.0);
  SplitMix64 rng(99);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(-30.0, 30.0);
    const double w = rng.uniform(0.0, 25.0);
    const Interval r = clip_interval(Interval(a, a + w), b);
    CHECK(r.lo >= b.min);
    CHECK(r.hi <= b.max);
    CHECK(r.lo <= r.hi);
  }
}
