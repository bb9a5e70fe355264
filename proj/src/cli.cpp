#include "cdpcal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "cdpcal/acc.hpp"
#include "cdpcal/baselines.hpp"
#include "cdpcal/cdp.hpp"
#include "cdpcal/io.hpp"
#include "cdpcal/metrics.hpp"
#include "cdpcal/rng.hpp"
#include "cdpcal/synth.hpp"

namespace cdpcal {

namespace {

constexpr std::uint64_t kSplitStream = 101;  // scenario cal/test split
constexpr std::uint64_t kSweepStream = 202;  // sweep half split

const std::set<std::string>& known_methods() {
  static const std::set<std::string> methods = {"cdp", "cdp-acc", "cqr", "qr", "gaussian"};
  return methods;
}

SchemaKind required_schema(const std::string& method) {
  if (method == "cqr" || method == "qr") return SchemaKind::quantile;
  if (method == "gaussian") return SchemaKind::gaussian;
  return SchemaKind::point;
}

void validate_config(const RunConfig& cfg, bool needs_test) {
  if (!known_methods().count(cfg.method)) {
    throw error(errc::invalid_argument,
                "unknown method '" + cfg.method + "' (cdp|cdp-acc|cqr|qr|gaussian)");
  }
  Alpha alpha_check(cfg.alpha);
  parse_format(cfg.format);
  if (!cfg.schema.empty() && parse_schema(cfg.schema) != required_schema(cfg.method)) {
    throw error(errc::invalid_argument,
                "schema '" + cfg.schema + "' does not match method '" + cfg.method + "'");
  }
  const bool scenario_mode = !cfg.scenario.empty();
  if (scenario_mode) {
    if (!cfg.cal_path.empty() || !cfg.test_path.empty()) {
      throw error(errc::invalid_argument, "--scenario excludes --cal/--test");
    }
    scenario_by_name(cfg.scenario, 2, 0);  // name check only
    if (cfg.n_cal < 1 || cfg.n_test < 1) {
      throw error(errc::invalid_argument, "scenario sizes must be >= 1");
    }
  } else {
    if (cfg.cal_path.empty() || (needs_test && cfg.test_path.empty())) {
      throw error(errc::invalid_argument, "need --scenario or --cal/--test files");
    }
  }
  if (cfg.bins < 1) {
    throw error(errc::invalid_argument, "--bins must be >= 1");
  }
  if (cfg.hist_bins < 1) {
    throw error(errc::invalid_argument, "--hist-bins must be >= 1");
  }
  if (cfg.view_scale < 0.0) {
    throw error(errc::invalid_argument, "--view-scale must be >= 0");
  }
  if (cfg.bounds_pair) {
    TargetBounds check(cfg.bounds_pair->first, cfg.bounds_pair->second);
    if (cfg.bdi && (cfg.bounds_pair->first != 0.0 || cfg.bounds_pair->second != 63.0)) {
      throw error(errc::invalid_argument, "--bdi conflicts with explicit --bounds");
    }
  }
  if (cfg.out.empty()) {
    throw error(errc::invalid_argument, "--out is required");
  }
}

std::optional<TargetBounds> resolve_bounds(const RunConfig& cfg) {
  if (cfg.bdi) return TargetBounds(0.0, 63.0);
  if (cfg.bounds_pair) return TargetBounds(cfg.bounds_pair->first, cfg.bounds_pair->second);
  return std::nullopt;
}

struct Dataset {
  std::vector<PredictionRecord> cal_points;  // point methods (and acc)
  std::vector<PredictionRecord> test_points;
  std::vector<QuantilePredictionRecord> cal_quantile;
  std::vector<QuantilePredictionRecord> test_quantile;
  std::vector<GaussianPredictionRecord> cal_gaussian;
  std::vector<GaussianPredictionRecord> test_gaussian;
};

Dataset load_dataset(const RunConfig& cfg) {
  Dataset data;
  const SchemaKind kind = required_schema(cfg.method);
  if (!cfg.scenario.empty()) {
    const std::size_t total = cfg.n_cal + cfg.n_test;
    const ScenarioSpec spec = scenario_by_name(cfg.scenario, total, cfg.seed);
    const auto records = generate_scenario(spec);
    const double frac =
        static_cast<double>(cfg.n_cal) / static_cast<double>(total);
    auto [cal, test] =
        exchangeable_split(records, frac, SplitMix64::derive(cfg.seed, kSplitStream));
    if (kind == SchemaKind::quantile) {
      const Alpha alpha(cfg.alpha);
      data.cal_quantile = quantile_view(cal, spec, alpha, cfg.view_scale);
      data.test_quantile = quantile_view(test, spec, alpha, cfg.view_scale);
    } else if (kind == SchemaKind::gaussian) {
      data.cal_gaussian = gaussian_view(cal, spec, cfg.view_scale);
      data.test_gaussian = gaussian_view(test, spec, cfg.view_scale);
    }
    data.cal_points = std::move(cal);
    data.test_points = std::move(test);
    return data;
  }
  switch (kind) {
    case SchemaKind::point:
      data.cal_points = read_point_predictions(cfg.cal_path);
      data.test_points = read_point_predictions(cfg.test_path);
      if (data.cal_points.empty() || data.test_points.empty()) {
        throw error(errc::empty_input, "input file has no data rows");
      }
      break;
    case SchemaKind::quantile:
      data.cal_quantile = read_quantile_predictions(cfg.cal_path);
      data.test_quantile = read_quantile_predictions(cfg.test_path);
      if (data.cal_quantile.empty() || data.test_quantile.empty()) {
        throw error(errc::empty_input, "input file has no data rows");
      }
      break;
    case SchemaKind::gaussian:
      data.cal_gaussian = read_gaussian_predictions(cfg.cal_path);
      data.test_gaussian = read_gaussian_predictions(cfg.test_path);
      if (data.cal_gaussian.empty() || data.test_gaussian.empty()) {
        throw error(errc::empty_input, "input file has no data rows");
      }
      break;
  }
  return data;
}

struct MethodOutput {
  std::vector<double> y_true;
  std::vector<Interval> intervals;
  EvaluationReport report;
};

// Prediction range for per-bin calibration: target bounds when configured,
// otherwise the calibration predictions' own span.
std::pair<double, double> resolve_partition_range(const std::vector<PredictionRecord>& cal,
                                                  const std::optional<TargetBounds>& bounds) {
  if (bounds) return {bounds->min, bounds->max};
  double lo = cal.front().y_pred;
  double hi = lo;
  for (const auto& r : cal) {
    lo = std::min(lo, r.y_pred);
    hi = std::max(hi, r.y_pred);
  }
  if (lo == hi) {  // degenerate span still needs a partition
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi};
}

MethodOutput run_method(const RunConfig& cfg, const Dataset& data) {
  const Alpha alpha(cfg.alpha);
  const auto bounds = resolve_bounds(cfg);
  const GroupScheme scheme = severity_groups();

  MethodOutput out;
  std::vector<double> y_point;
  std::vector<double> raw_widths;
  std::size_t crossing = 0;

  if (cfg.method == "cdp" || cfg.method == "cdp-acc") {
    out.y_true.reserve(data.test_points.size());
    y_point.reserve(data.test_points.size());
    for (const auto& r : data.test_points) {
      out.y_true.push_back(r.y_true);
      y_point.push_back(r.y_pred);
    }
    if (cfg.method == "cdp") {
      const CdpCalibration calib = calibrate_cdp(data.cal_points, alpha, bounds);
      const double raw = std::isinf(calib.s_hat)
                             ? (bounds ? bounds->max - bounds->min : kInfinity)
                             : 2.0 * calib.s_hat;
      for (const auto& r : data.test_points) {
        out.intervals.push_back(predict_cdp(r.y_pred, calib));
        raw_widths.push_back(raw);
      }
    } else {
      const auto [L, U] = resolve_partition_range(data.cal_points, bounds);
      const AccCalibration calib =
          calibrate_cdp_acc(data.cal_points, alpha, cfg.bins, cfg.hist_bins, L, U, bounds,
                            cfg.n_min, cfg.seed);
      for (const auto& r : data.test_points) {
        const Interval iv = predict_cdp_acc(r.y_pred, calib);
        out.intervals.push_back(iv);
        raw_widths.push_back(iv.width());
      }
    }
  } else if (cfg.method == "cqr" || cfg.method == "qr") {
    out.y_true.reserve(data.test_quantile.size());
    for (const auto& r : data.test_quantile) {
      out.y_true.push_back(r.y_true);
      y_point.push_back((r.q_lo + r.q_hi) / 2.0);  // midpoint as the point read-out
      if (r.crossed()) ++crossing;
    }
    if (cfg.method == "cqr") {
      const CqrCalibration calib = calibrate_cqr(data.cal_quantile, alpha, bounds);
      for (const auto& r : data.test_quantile) {
        out.intervals.push_back(predict_cqr(r.q_lo, r.q_hi, calib));
        const double w = (r.q_hi + calib.s_hat) - (r.q_lo - calib.s_hat);
        raw_widths.push_back(std::max(w, 0.0));
      }
    } else {
      for (const auto& r : data.test_quantile) {
        out.intervals.push_back(predict_qr_raw(r, bounds));
        raw_widths.push_back(std::max(r.q_hi - r.q_lo, 0.0));
      }
    }
  } else {  // gaussian
    const double z = gaussian_two_sided_z(alpha);
    out.y_true.reserve(data.test_gaussian.size());
    for (const auto& r : data.test_gaussian) {
      out.y_true.push_back(r.y_true);
      y_point.push_back(r.mu);
      out.intervals.push_back(gaussian_interval(r, alpha, bounds));
      raw_widths.push_back(2.0 * z * r.sigma);
    }
  }

  out.report =
      evaluate(cfg.method, out.intervals, out.y_true, y_point, raw_widths, crossing, scheme);
  return out;
}

std::string intervals_path_for(const std::string& out_path) {
  std::filesystem::path p(out_path);
  std::filesystem::path sibling = p.parent_path() / (p.stem().string() + ".intervals.csv");
  return sibling.string();
}

int report_failure(std::ostream& diag, const std::string& message, int code) {
  diag << "error: " << message << "\n";
  return code;
}

bool same_data_source(const RunConfig& a, const RunConfig& b) {
  return a.scenario == b.scenario && a.cal_path == b.cal_path && a.test_path == b.test_path &&
         a.seed == b.seed && a.n_cal == b.n_cal && a.n_test == b.n_test &&
         a.alpha == b.alpha && a.view_scale == b.view_scale;
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& diag) {
  try {
    validate_config(config, /*needs_test=*/true);
  } catch (const std::exception& e) {
    return report_failure(diag, e.what(), 1);
  }
  Dataset data;
  try {
    data = load_dataset(config);
  } catch (const std::exception& e) {
    return report_failure(diag, e.what(), 2);
  }
  try {
    const MethodOutput out = run_method(config, data);
    write_report(out.report, config.out, parse_format(config.format));
    write_intervals(out.y_true, out.intervals, intervals_path_for(config.out));
    return 0;
  } catch (const std::exception& e) {
    return report_failure(diag, e.what(), 3);
  }
}

int cmd_compare(const std::vector<RunConfig>& configs, const std::string& out_path,
                std::ostream& diag) {
  try {
    if (configs.empty()) {
      throw error(errc::invalid_argument, "compare needs at least one method");
    }
    std::set<std::string> methods;
    for (const auto& cfg : configs) {
      validate_config(cfg, /*needs_test=*/true);
      if (!methods.insert(cfg.method).second) {
        throw error(errc::invalid_argument, "duplicate method '" + cfg.method + "' in compare");
      }
      if (!same_data_source(cfg, configs.front())) {
        throw error(errc::data_mismatch, "compare configs must reference identical data");
      }
    }
    if (out_path.empty()) {
      throw error(errc::invalid_argument, "--out is required");
    }
  } catch (const std::exception& e) {
    return report_failure(diag, e.what(), 1);
  }

  std::vector<EvaluationReport> reports;
  for (const auto& cfg : configs) {
    Dataset data;
    try {
      data = load_dataset(cfg);
    } catch (const std::exception& e) {
      return report_failure(diag, e.what(), 2);
    }
    try {
      reports.push_back(run_method(cfg, data).report);
    } catch (const std::exception& e) {
      return report_failure(diag, e.what(), 3);
    }
  }
  try {
    std::sort(reports.begin(), reports.end(),
              [](const EvaluationReport& a, const EvaluationReport& b) {
                return a.method < b.method;
              });
    write_reports(reports, out_path, parse_format(configs.front().format));
    return 0;
  } catch (const std::exception& e) {
    return report_failure(diag, e.what(), 3);
  }
}

int cmd_sweep_m(const RunConfig& base, const std::vector<int>& m_values, std::ostream& diag) {
  try {
    if (base.method != "cdp-acc") {
      throw error(errc::invalid_argument, "sweep-m only applies to method cdp-acc");
    }
    validate_config(base, /*needs_test=*/false);
    if (m_values.empty()) {
      throw error(errc::invalid_argument, "sweep-m needs at least one M value");
    }
    for (int m : m_values) {
      if (m < 1) {
        throw error(errc::invalid_argument, "M values must be >= 1");
      }
    }
  } catch (const std::exception& e) {
    return report_failure(diag, e.what(), 1);
  }

  std::vector<PredictionRecord> cal;
  try {
    if (!base.scenario.empty()) {
      const ScenarioSpec spec = scenario_by_name(base.scenario, base.n_cal, base.seed);
      cal = generate_scenario(spec);
    } else {
      cal = read_point_predictions(base.cal_path);
      if (cal.size() < 2) {
        throw error(errc::empty_input, "sweep-m needs at least two calibration rows");
      }
    }
  } catch (const std::exception& e) {
    return report_failure(diag, e.what(), 2);
  }

  try {
    const Alpha alpha(base.alpha);
    const auto bounds = resolve_bounds(base);
    auto [fit_half, eval_half] =
        exchangeable_split(cal, 0.5, SplitMix64::derive(base.seed, kSweepStream));
    const auto [L, U] = resolve_partition_range(fit_half, bounds);

    std::vector<SweepRow> rows;
    for (int m : m_values) {
      const AccCalibration calib = calibrate_cdp_acc(fit_half, alpha, m, base.hist_bins, L, U,
                                                     bounds, base.n_min, base.seed);
      std::vector<Interval> intervals;
      std::vector<double> y;
      intervals.reserve(eval_half.size());
      y.reserve(eval_half.size());
      for (const auto& r : eval_half) {
        intervals.push_back(predict_cdp_acc(r.y_pred, calib));
        y.push_back(r.y_true);
      }
      rows.push_back({m, picp(intervals, y), mpiw(intervals), false});
    }
    // pick the narrowest M that still meets nominal coverage; ties go to
    // the smaller M
    int best = -1;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].picp < 1.0 - base.alpha) continue;
      if (best < 0 || rows[i].mpiw < rows[best].mpiw ||
          (rows[i].mpiw == rows[best].mpiw && rows[i].m < rows[best].m)) {
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) rows[best].selected = true;
    write_sweep(rows, base.out, parse_format(base.format));
    return 0;
  } catch (const std::exception& e) {
    return report_failure(diag, e.what(), 3);
  }
}

}  // namespace cdpcal
