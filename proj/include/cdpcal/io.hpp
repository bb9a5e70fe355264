#pragma once

#include <string>
#include <vector>

#include "cdpcal/acc.hpp"
#include "cdpcal/cdp.hpp"
#include "cdpcal/core.hpp"
#include "cdpcal/metrics.hpp"

namespace cdpcal {

enum class SchemaKind { point, quantile, gaussian };
enum class ReportFormat { csv, markdown };

SchemaKind parse_schema(const std::string& s);
ReportFormat parse_format(const std::string& s);

/// Comma-separated ingestion with a mandatory header row. Column order is
/// free and extra columns are ignored. Required columns per kind:
///   point:    y_true, y_pred
///   quantile: y_true, q_lo, q_hi
///   gaussian: y_true, mu, sigma
/// Errors carry the file path and 1-based line number (header is line 1).
std::vector<PredictionRecord> read_point_predictions(const std::string& path);
std::vector<QuantilePredictionRecord> read_quantile_predictions(const std::string& path);
std::vector<GaussianPredictionRecord> read_gaussian_predictions(const std::string& path);

/// Writers use 17 significant digits so a read of the written file
/// reproduces every value exactly.
void write_point_predictions(const std::vector<PredictionRecord>& records,
                             const std::string& path);
void write_quantile_predictions(const std::vector<QuantilePredictionRecord>& records,
                                const std::string& path);
void write_gaussian_predictions(const std::vector<GaussianPredictionRecord>& records,
                                const std::string& path);

/// Deterministic rendering: fixed column order, 4-decimal fixed-point
/// reals, "na" for groups without samples, trailing newline, and a header
/// naming the random generator algorithm. Identical reports produce
/// identical bytes.
std::string render_reports(const std::vector<EvaluationReport>& reports, ReportFormat format);
void write_report(const EvaluationReport& report, const std::string& path, ReportFormat format);
void write_reports(const std::vector<EvaluationReport>& reports, const std::string& path,
                   ReportFormat format);

/// Parse the csv report layout back (4-decimal precision).
std::vector<EvaluationReport> read_report_csv(const std::string& path);

/// Per-sample interval dump emitted next to every run report.
void write_intervals(const std::vector<double>& y_true, const std::vector<Interval>& intervals,
                     const std::string& path);

struct SweepRow {
  int m = 0;
  double picp = 0.0;
  double mpiw = 0.0;
  bool selected = false;
};

void write_sweep(const std::vector<SweepRow>& rows, const std::string& path,
                 ReportFormat format);

/// Calibration artifacts persist as versioned key-value text
/// (schema_version first); loading refuses unknown versions so stale
/// artifacts fail loudly instead of mispredicting.
void save_calibration(const CdpCalibration& calib, const std::string& path);
void save_calibration(const AccCalibration& calib, const std::string& path);
CdpCalibration load_cdp_calibration(const std::string& path);
AccCalibration load_acc_calibration(const std::string& path);

}  // namespace cdpcal
