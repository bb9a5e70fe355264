#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdpcal/core.hpp"

namespace cdpcal {

enum class Family {
  homoscedastic_gaussian,
  heteroscedastic_gaussian,
  bimodal,
  imbalanced_skew,
};

/// A seeded joint law over (prediction, label) pairs. Scenarios simulate
/// the pair directly: calibration only ever sees this pair, so no input
/// modality or model is involved.
///
/// Families (sigma(p) below means base + slope * (p - range.min)):
///   - homoscedastic_gaussian:   p ~ U(range);              y = p + base * N(0,1)
///   - heteroscedastic_gaussian: p ~ U(range);              y = p + sigma(p) * N(0,1)
///   - bimodal:                  p ~ U(range);              y = p +- gap/2 + base * N(0,1)
///   - imbalanced_skew:          p ~ exponential tilt toward range.min (rate);
///                               y = p + sigma(p) * (Exp(1) - 1)
/// Labels are clipped into range. Draw order per record is fixed (p first,
/// then the family's draws) so streams are replayable.
struct ScenarioSpec {
  std::string name;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  Family family = Family::homoscedastic_gaussian;
  double base = 0.0;   // baseline spread
  double slope = 0.0;  // spread slope (heteroscedastic, imbalanced_skew)
  double gap = 0.0;    // mode separation (bimodal)
  double rate = 0.0;   // tilt rate (imbalanced_skew), > 0
  TargetBounds range{0.0, 1.0};
};

/// Named presets over the score range [0, 63]; n and seed supplied by the
/// caller. Throws for unknown names.
///   homoscedastic-v1    base 3
///   heteroscedastic-v1  base 1, slope 0.2
///   bimodal-v1          base 1.5, gap 10
///   imbalanced-skew-v1  base 2, slope 0.15, rate 3
ScenarioSpec scenario_by_name(const std::string& name, std::size_t n, std::uint64_t seed);
const std::vector<std::string>& scenario_names();

std::vector<PredictionRecord> generate_scenario(const ScenarioSpec& spec);

/// Seeded uniform shuffle, then split at round(frac_cal * n): disjoint and
/// exhaustive, calibration part first.
std::pair<std::vector<PredictionRecord>, std::vector<PredictionRecord>> exchangeable_split(
    const std::vector<PredictionRecord>& records, double frac_cal, std::uint64_t seed);

/// Quantile-regressor view of scenario records: each prediction is mapped
/// to the family's exact conditional (alpha/2, 1 - alpha/2) quantiles of
/// the unclipped label law, then shrunk toward the conditional median by
/// `scale` (scale < 1 simulates an overconfident model).
std::vector<QuantilePredictionRecord> quantile_view(const std::vector<PredictionRecord>& records,
                                                    const ScenarioSpec& spec, Alpha alpha,
                                                    double scale);

/// Gaussian-output view: conditional mean plus `scale` times the family's
/// conditional standard deviation.
std::vector<GaussianPredictionRecord> gaussian_view(const std::vector<PredictionRecord>& records,
                                                    const ScenarioSpec& spec, double scale);

}  // namespace cdpcal
