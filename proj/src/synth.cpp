#include "cdpcal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cdpcal/baselines.hpp"
#include "cdpcal/rng.hpp"

namespace cdpcal {

namespace {

void validate(const ScenarioSpec& spec) {
  if (spec.n < 2) {
    throw error(errc::invalid_spec, "scenario needs n >= 2");
  }
  if (spec.base < 0.0 || spec.slope < 0.0 || spec.gap < 0.0) {
    throw error(errc::invalid_spec, "scenario spread parameters must be >= 0");
  }
  if (spec.family == Family::imbalanced_skew && !(spec.rate > 0.0)) {
    throw error(errc::invalid_spec, "imbalanced_skew needs rate > 0");
  }
}

double spread_at(const ScenarioSpec& spec, double p) {
  return spec.base + spec.slope * (p - spec.range.min);
}

double normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)); }

// Conditional CDF of the unclipped label law given prediction p.
double conditional_cdf(const ScenarioSpec& spec, double p, double t) {
  switch (spec.family) {
    case Family::homoscedastic_gaussian:
    case Family::heteroscedastic_gaussian: {
      const double s = std::max(spread_at(spec, p), 1e-12);
      return normal_cdf((t - p) / s);
    }
    case Family::bimodal: {
      const double s = std::max(spec.base, 1e-12);
      return 0.5 * normal_cdf((t - p + spec.gap / 2.0) / s) +
             0.5 * normal_cdf((t - p - spec.gap / 2.0) / s);
    }
    case Family::imbalanced_skew: {
      // y = p + s(p) * (E - 1), E ~ Exp(1)
      const double b = std::max(spread_at(spec, p), 1e-12);
      const double e = (t - p) / b + 1.0;
      return e <= 0.0 ? 0.0 : 1.0 - std::exp(-e);
    }
  }
  return 0.0;
}

// Conditional quantile by bisection on the CDF; all families here have
// continuous strictly increasing CDFs on the bracket.
double conditional_quantile(const ScenarioSpec& spec, double p, double prob) {
  const double span = spec.base + spec.slope * (spec.range.max - spec.range.min) + spec.gap;
  double lo = p - 40.0 * (span + 1.0);
  double hi = p + 40.0 * (span + 1.0);
  for (int i = 0; i < 200 && hi - lo > 1e-10 * (1.0 + std::abs(p)); ++i) {
    const double mid = (lo + hi) / 2.0;
    if (conditional_cdf(spec, p, mid) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2.0;
}

}  // namespace

ScenarioSpec scenario_by_name(const std::string& name, std::size_t n, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.name = name;
  spec.n = n;
  spec.seed = seed;
  spec.range = TargetBounds(0.0, 63.0);
  if (name == "homoscedastic-v1") {
    spec.family = Family::homoscedastic_gaussian;
    spec.base = 3.0;
  } else if (name == "heteroscedastic-v1") {
    spec.family = Family::heteroscedastic_gaussian;
    spec.base = 1.0;
    spec.slope = 0.2;
  } else if (name == "bimodal-v1") {
    spec.family = Family::bimodal;
    spec.base = 1.5;
    spec.gap = 10.0;
  } else if (name == "imbalanced-skew-v1") {
    spec.family = Family::imbalanced_skew;
    spec.base = 2.0;
    spec.slope = 0.15;
    spec.rate = 3.0;
  } else {
    throw error(errc::invalid_spec, "unknown scenario: " + name);
  }
  return spec;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "homoscedastic-v1", "heteroscedastic-v1", "bimodal-v1", "imbalanced-skew-v1"};
  return names;
}

std::vector<PredictionRecord> generate_scenario(const ScenarioSpec& spec) {
  validate(spec);
  SplitMix64 rng(spec.seed);
  const double lo = spec.range.min;
  const double hi = spec.range.max;
  std::vector<PredictionRecord> out;
  out.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double p;
    double y;
    switch (spec.family) {
      case Family::homoscedastic_gaussian:
        p = rng.uniform(lo, hi);
        y = p + spec.base * rng.normal();
        break;
      case Family::heteroscedastic_gaussian:
        p = rng.uniform(lo, hi);
        y = p + spread_at(spec, p) * rng.normal();
        break;
      case Family::bimodal: {
        p = rng.uniform(lo, hi);
        const double mode = rng.next_double() < 0.5 ? -spec.gap / 2.0 : spec.gap / 2.0;
        y = p + mode + spec.base * rng.normal();
        break;
      }
      case Family::imbalanced_skew: {
        // inverse-CDF draw of Exp(rate) truncated to [0, 1]: predictions
        // pile up at the low end while label noise grows with severity
        const double u = rng.next_double();
        const double x = -std::log1p(-u * (1.0 - std::exp(-spec.rate))) / spec.rate;
        p = lo + (hi - lo) * x;
        y = p + spread_at(spec, p) * (rng.exponential() - 1.0);
        break;
      }
      default:
        throw error(errc::invalid_spec, "unknown family");
    }
    out.push_back({std::clamp(y, lo, hi), p});
  }
  return out;
}

std::pair<std::vector<PredictionRecord>, std::vector<PredictionRecord>> exchangeable_split(
    const std::vector<PredictionRecord>& records, double frac_cal, std::uint64_t seed) {
  if (!(frac_cal > 0.0 && frac_cal < 1.0)) {
    throw error(errc::invalid_fraction, "frac_cal must lie strictly inside (0, 1)");
  }
  if (records.size() < 2) {
    throw error(errc::empty_input, "exchangeable_split: need at least two records");
  }
  std::vector<PredictionRecord> shuffled(records);
  SplitMix64 rng(seed);
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    const std::size_t j = rng.next_u64() % (i + 1);
    std::swap(shuffled[i], shuffled[j]);
  }
  auto n_cal = static_cast<std::size_t>(
      std::llround(frac_cal * static_cast<double>(shuffled.size())));
  n_cal = std::clamp<std::size_t>(n_cal, 1, shuffled.size() - 1);
  std::vector<PredictionRecord> cal(shuffled.begin(), shuffled.begin() + n_cal);
  std::vector<PredictionRecord> test(shuffled.begin() + n_cal, shuffled.end());
  return {std::move(cal), std::move(test)};
}

std::vector<QuantilePredictionRecord> quantile_view(const std::vector<PredictionRecord>& records,
                                                    const ScenarioSpec& spec, Alpha alpha,
                                                    double scale) {
  validate(spec);
  if (scale < 0.0) {
    throw error(errc::invalid_argument, "quantile_view: scale must be >= 0");
  }
  std::vector<QuantilePredictionRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const double p = r.y_pred;
    double med;
    double lo;
    double hi;
    switch (spec.family) {
      case Family::homoscedastic_gaussian:
      case Family::heteroscedastic_gaussian: {
        const double z = gaussian_two_sided_z(alpha);
        const double s = spread_at(spec, p);
        med = p;
        lo = med - z * s;
        hi = med + z * s;
        break;
      }
      case Family::bimodal:
        med = p;  // symmetric mixture
        lo = conditional_quantile(spec, p, alpha.value() / 2.0);
        hi = conditional_quantile(spec, p, 1.0 - alpha.value() / 2.0);
        break;
      case Family::imbalanced_skew: {
        // quantile of p + s(p) * (E - 1) at prob q is p + s(p) * (-log(1-q) - 1)
        const double s = spread_at(spec, p);
        auto q_at = [&](double prob) { return p + s * (-std::log1p(-prob) - 1.0); };
        med = q_at(0.5);
        lo = q_at(alpha.value() / 2.0);
        hi = q_at(1.0 - alpha.value() / 2.0);
        break;
      }
      default:
        throw error(errc::invalid_spec, "unknown family");
    }
    out.push_back({r.y_true, med - scale * (med - lo), med + scale * (hi - med)});
  }
  return out;
}

std::vector<GaussianPredictionRecord> gaussian_view(const std::vector<PredictionRecord>& records,
                                                    const ScenarioSpec& spec, double scale) {
  validate(spec);
  if (scale < 0.0) {
    throw error(errc::invalid_argument, "gaussian_view: scale must be >= 0");
  }
  std::vector<GaussianPredictionRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const double p = r.y_pred;
    double mu = p;
    double sd;
    switch (spec.family) {
      case Family::homoscedastic_gaussian:
      case Family::heteroscedastic_gaussian:
        sd = spread_at(spec, p);
        break;
      case Family::bimodal:
        sd = std::sqrt(spec.base * spec.base + (spec.gap / 2.0) * (spec.gap / 2.0));
        break;
      case Family::imbalanced_skew:
        sd = spread_at(spec, p);  // E - 1 has unit variance
        break;
      default:
        throw error(errc::invalid_spec, "unknown family");
    }
    out.push_back({r.y_true, mu, scale * sd});
  }
  return out;
}

}  // namespace cdpcal
