#include "cdpcal/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cdpcal/rng.hpp"

namespace cdpcal {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::string where(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

double parse_field(const std::string& field, const std::string& path, std::size_t line) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw error(errc::malformed_row,
                where(path, line) + ": cannot parse '" + field + "' as a number");
  }
  if (!std::isfinite(v)) {
    throw error(errc::non_finite_value, where(path, line) + ": non-finite value '" + field + "'");
  }
  return v;
}

struct Table {
  std::vector<std::size_t> columns;        // indices of the requested columns
  std::vector<std::vector<double>> rows;   // parsed values, requested order
  std::vector<std::size_t> line_numbers;   // 1-based source line per row
};

Table read_table(const std::string& path, const std::vector<std::string>& wanted) {
  std::ifstream in(path);
  if (!in) {
    throw error(errc::file_not_found, "cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw error(errc::malformed_row, where(path, 1) + ": missing header row");
  }
  const std::vector<std::string> header = split_csv(line);
  Table table;
  for (const auto& name : wanted) {
    bool found = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) {
        table.columns.push_back(i);
        found = true;
        break;
      }
    }
    if (!found) {
      throw error(errc::missing_column, path + ": missing column '" + name + "'");
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    std::vector<double> row;
    row.reserve(wanted.size());
    for (std::size_t c = 0; c < wanted.size(); ++c) {
      if (table.columns[c] >= fields.size()) {
        throw error(errc::malformed_row,
                    where(path, line_no) + ": row has no '" + wanted[c] + "' field");
      }
      row.push_back(parse_field(fields[table.columns[c]], path, line_no));
    }
    table.rows.push_back(std::move(row));
    table.line_numbers.push_back(line_no);
  }
  return table;
}

std::string g17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fixed4(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "na");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw error(errc::io_error, "cannot write " + path);
  }
  out << text;
  if (!out) {
    throw error(errc::io_error, "write failed for " + path);
  }
}

double parse_artifact_value(const std::string& token, const std::string& path) {
  if (token == "inf") return kInfinity;
  if (token == "-inf") return -kInfinity;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw error(errc::io_error, path + ": bad numeric token '" + token + "'");
  }
  return v;
}

// Key-value artifact reader: one "key tokens..." entry per line.
std::map<std::string, std::vector<std::string>> read_artifact_lines(
    const std::string& path, std::vector<std::vector<std::string>>* bin_lines) {
  std::ifstream in(path);
  if (!in) {
    throw error(errc::file_not_found, "cannot open " + path);
  }
  std::map<std::string, std::vector<std::string>> kv;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (first) {
      if (key != "schema_version" || tokens != std::vector<std::string>{"1"}) {
        throw error(errc::incompatible_artifact,
                    path + ": unsupported or missing schema_version (expected 1)");
      }
      first = false;
    }
    if (key == "bin" && bin_lines) {
      bin_lines->push_back(std::move(tokens));
    } else {
      kv[key] = std::move(tokens);
    }
  }
  if (first) {
    throw error(errc::incompatible_artifact, path + ": empty artifact");
  }
  return kv;
}

const std::vector<std::string>& require_key(
    const std::map<std::string, std::vector<std::string>>& kv, const std::string& key,
    const std::string& path) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    throw error(errc::io_error, path + ": artifact missing key '" + key + "'");
  }
  return it->second;
}

std::optional<TargetBounds> parse_bounds(const std::vector<std::string>& tokens,
                                         const std::string& path) {
  if (tokens.size() == 1 && tokens[0] == "none") return std::nullopt;
  if (tokens.size() != 2) {
    throw error(errc::io_error, path + ": malformed bounds entry");
  }
  return TargetBounds(parse_artifact_value(tokens[0], path),
                      parse_artifact_value(tokens[1], path));
}

std::string bounds_entry(const std::optional<TargetBounds>& bounds) {
  if (!bounds) return "none";
  return g17(bounds->min) + " " + g17(bounds->max);
}

}  // namespace

SchemaKind parse_schema(const std::string& s) {
  if (s == "point") return SchemaKind::point;
  if (s == "quantile") return SchemaKind::quantile;
  if (s == "gaussian") return SchemaKind::gaussian;
  throw error(errc::invalid_argument, "unknown schema '" + s + "' (point|quantile|gaussian)");
}

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "markdown") return ReportFormat::markdown;
  throw error(errc::invalid_argument, "unknown format '" + s + "' (csv|markdown)");
}

std::vector<PredictionRecord> read_point_predictions(const std::string& path) {
  const Table t = read_table(path, {"y_true", "y_pred"});
  std::vector<PredictionRecord> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) out.push_back({r[0], r[1]});
  return out;
}

std::vector<QuantilePredictionRecord> read_quantile_predictions(const std::string& path) {
  const Table t = read_table(path, {"y_true", "q_lo", "q_hi"});
  std::vector<QuantilePredictionRecord> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) out.push_back({r[0], r[1], r[2]});
  return out;
}

std::vector<GaussianPredictionRecord> read_gaussian_predictions(const std::string& path) {
  const Table t = read_table(path, {"y_true", "mu", "sigma"});
  std::vector<GaussianPredictionRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (r[2] < 0.0) {
      throw error(errc::malformed_row, where(path, t.line_numbers[i]) + ": sigma must be >= 0");
    }
    out.push_back({r[0], r[1], r[2]});
  }
  return out;
}

void write_point_predictions(const std::vector<PredictionRecord>& records,
                             const std::string& path) {
  std::string text = "y_true,y_pred\n";
  for (const auto& r : records) text += g17(r.y_true) + "," + g17(r.y_pred) + "\n";
  write_text(path, text);
}

void write_quantile_predictions(const std::vector<QuantilePredictionRecord>& records,
                                const std::string& path) {
  std::string text = "y_true,q_lo,q_hi\n";
  for (const auto& r : records) {
    text += g17(r.y_true) + "," + g17(r.q_lo) + "," + g17(r.q_hi) + "\n";
  }
  write_text(path, text);
}

void write_gaussian_predictions(const std::vector<GaussianPredictionRecord>& records,
                                const std::string& path) {
  std::string text = "y_true,mu,sigma\n";
  for (const auto& r : records) {
    text += g17(r.y_true) + "," + g17(r.mu) + "," + g17(r.sigma) + "\n";
  }
  write_text(path, text);
}

std::string render_reports(const std::vector<EvaluationReport>& reports, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::csv) {
    out += "# report v1\n";
    out += std::string("# rng: ") + std::string(SplitMix64::kAlgorithm) + "\n";
    out += "method,picp,mpiw,mpiw_raw,ssc,mae,rmse,crossing_rate,n_test\n";
    for (const auto& r : reports) {
      out += r.method + "," + fixed4(r.picp) + "," + fixed4(r.mpiw) + "," + fixed4(r.mpiw_raw) +
             "," + fixed4(r.ssc) + "," + fixed4(r.mae) + "," + fixed4(r.rmse) + "," +
             fixed4(r.crossing_rate) + "," + std::to_string(r.n_test) + "\n";
    }
    out += "# per-group coverage\n";
    out += "method,group,count,coverage,mean_width\n";
    for (const auto& r : reports) {
      for (const auto& g : r.per_group) {
        out += r.method + "," + g.name + "," + std::to_string(g.count) + ",";
        if (g.count == 0) {
          out += "na,na\n";
        } else {
          out += fixed4(g.coverage) + "," + fixed4(g.mean_width) + "\n";
        }
      }
    }
  } else {
    out += "# calibration report\n\n";
    out += std::string("rng: ") + std::string(SplitMix64::kAlgorithm) + "\n\n";
    out += "| Method | PICP | MPIW | MPIW_raw | SSC | MAE | RMSE | Crossing | N |\n";
    out += "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : reports) {
      out += "| " + r.method + " | " + fixed4(r.picp) + " | " + fixed4(r.mpiw) + " | " +
             fixed4(r.mpiw_raw) + " | " + fixed4(r.ssc) + " | " + fixed4(r.mae) + " | " +
             fixed4(r.rmse) + " | " + fixed4(r.crossing_rate) + " | " +
             std::to_string(r.n_test) + " |\n";
    }
    out += "\n## per-group coverage\n\n";
    out += "| Method | Group | Count | Coverage | Mean width |\n";
    out += "|---|---|---|---|---|\n";
    for (const auto& r : reports) {
      for (const auto& g : r.per_group) {
        out += "| " + r.method + " | " + g.name + " | " + std::to_string(g.count) + " | ";
        if (g.count == 0) {
          out += "na | na |\n";
        } else {
          out += fixed4(g.coverage) + " | " + fixed4(g.mean_width) + " |\n";
        }
      }
    }
  }
  return out;
}

void write_report(const EvaluationReport& report, const std::string& path,
                  ReportFormat format) {
  write_reports({report}, path, format);
}

void write_reports(const std::vector<EvaluationReport>& reports, const std::string& path,
                   ReportFormat format) {
  write_text(path, render_reports(reports, format));
}

std::vector<EvaluationReport> read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw error(errc::file_not_found, "cannot open " + path);
  }
  std::vector<EvaluationReport> reports;
  std::string line;
  bool in_groups = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "# per-group coverage") {
      in_groups = true;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> f = split_csv(line);
    if (!in_groups) {
      if (f.size() != 9) {
        throw error(errc::malformed_row, where(path, line_no) + ": bad summary row");
      }
      if (f[0] == "method") continue;  // header
      EvaluationReport r;
      r.method = f[0];
      r.picp = parse_field(f[1], path, line_no);
      r.mpiw = parse_field(f[2], path, line_no);
      r.mpiw_raw = parse_field(f[3], path, line_no);
      r.ssc = parse_field(f[4], path, line_no);
      r.mae = parse_field(f[5], path, line_no);
      r.rmse = parse_field(f[6], path, line_no);
      r.crossing_rate = parse_field(f[7], path, line_no);
      r.n_test = static_cast<std::size_t>(parse_field(f[8], path, line_no));
      reports.push_back(std::move(r));
    } else {
      if (f.size() != 5) {
        throw error(errc::malformed_row, where(path, line_no) + ": bad group row");
      }
      if (f[0] == "method") continue;  // header
      auto it = std::find_if(reports.begin(), reports.end(),
                             [&](const EvaluationReport& r) { return r.method == f[0]; });
      if (it == reports.end()) {
        throw error(errc::malformed_row,
                    where(path, line_no) + ": group row for unknown method '" + f[0] + "'");
      }
      GroupRow g;
      g.name = f[1];
      g.count = static_cast<std::size_t>(parse_field(f[2], path, line_no));
      if (f[3] != "na") {
        g.coverage = parse_field(f[3], path, line_no);
        g.mean_width = parse_field(f[4], path, line_no);
      }
      it->per_group.push_back(std::move(g));
    }
  }
  return reports;
}

void write_intervals(const std::vector<double>& y_true, const std::vector<Interval>& intervals,
                     const std::string& path) {
  if (y_true.size() != intervals.size()) {
    throw error(errc::length_mismatch, "write_intervals: input lengths differ");
  }
  std::string text = "index,y_true,lo,hi,width,covered\n";
  char buf[160];
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto& iv = intervals[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f,%d\n", i, y_true[i], iv.lo, iv.hi,
                  iv.width(), iv.contains(y_true[i]) ? 1 : 0);
    text += buf;
  }
  write_text(path, text);
}

void write_sweep(const std::vector<SweepRow>& rows, const std::string& path,
                 ReportFormat format) {
  std::string out;
  if (format == ReportFormat::csv) {
    out += "# sweep v1\n";
    out += std::string("# rng: ") + std::string(SplitMix64::kAlgorithm) + "\n";
    out += "m,picp,mpiw,selected\n";
    for (const auto& r : rows) {
      out += std::to_string(r.m) + "," + fixed4(r.picp) + "," + fixed4(r.mpiw) + "," +
             (r.selected ? "*" : "") + "\n";
    }
  } else {
    out += "# bin-count sweep\n\n";
    out += std::string("rng: ") + std::string(SplitMix64::kAlgorithm) + "\n\n";
    out += "| M | PICP | MPIW | Selected |\n|---|---|---|---|\n";
    for (const auto& r : rows) {
      out += "| " + std::to_string(r.m) + " | " + fixed4(r.picp) + " | " + fixed4(r.mpiw) +
             " | " + (r.selected ? "*" : "") + " |\n";
    }
  }
  write_text(path, out);
}

void save_calibration(const CdpCalibration& calib, const std::string& path) {
  std::string text = "schema_version 1\n";
  text += "kind cdp\n";
  text += "alpha " + g17(calib.alpha) + "\n";
  text += "n_cal " + std::to_string(calib.n_cal) + "\n";
  text += "s_hat " + g17(calib.s_hat) + "\n";
  text += "bounds " + bounds_entry(calib.bounds) + "\n";
  write_text(path, text);
}

void save_calibration(const AccCalibration& calib, const std::string& path) {
  std::string text = "schema_version 1\n";
  text += "kind cdp-acc\n";
  text += "alpha " + g17(calib.alpha) + "\n";
  text += "M " + std::to_string(calib.partition.M) + "\n";
  text += "K " + std::to_string(calib.K) + "\n";
  text += "L " + g17(calib.partition.L) + "\n";
  text += "U " + g17(calib.partition.U) + "\n";
  text += "n_min " + std::to_string(calib.n_min) + "\n";
  text += "seed " + std::to_string(calib.seed) + "\n";
  text += "bounds " + bounds_entry(calib.bounds) + "\n";
  text += "fallback_n " + std::to_string(calib.fallback.n_cal) + "\n";
  text += "fallback_s_hat " + g17(calib.fallback.s_hat) + "\n";
  for (std::size_t m = 0; m < calib.per_bin.size(); ++m) {
    const AccBin& bin = calib.per_bin[m];
    text += "bin " + std::to_string(m + 1) + " n " + std::to_string(bin.n);
    if (bin.fallback) {
      text += " fallback\n";
    } else {
      text += " s_hat " + g17(bin.s_hat) + " interval " + g17(bin.interval.lo) + " " +
              g17(bin.interval.hi) + "\n";
    }
  }
  write_text(path, text);
}

CdpCalibration load_cdp_calibration(const std::string& path) {
  auto kv = read_artifact_lines(path, nullptr);
  if (require_key(kv, "kind", path) != std::vector<std::string>{"cdp"}) {
    throw error(errc::incompatible_artifact, path + ": artifact kind is not 'cdp'");
  }
  CdpCalibration out;
  out.alpha = parse_artifact_value(require_key(kv, "alpha", path).at(0), path);
  out.n_cal = static_cast<std::size_t>(
      parse_artifact_value(require_key(kv, "n_cal", path).at(0), path));
  out.s_hat = parse_artifact_value(require_key(kv, "s_hat", path).at(0), path);
  out.bounds = parse_bounds(require_key(kv, "bounds", path), path);
  return out;
}

AccCalibration load_acc_calibration(const std::string& path) {
  std::vector<std::vector<std::string>> bin_lines;
  auto kv = read_artifact_lines(path, &bin_lines);
  if (require_key(kv, "kind", path) != std::vector<std::string>{"cdp-acc"}) {
    throw error(errc::incompatible_artifact, path + ": artifact kind is not 'cdp-acc'");
  }
  AccCalibration out;
  out.alpha = parse_artifact_value(require_key(kv, "alpha", path).at(0), path);
  const int M =
      static_cast<int>(parse_artifact_value(require_key(kv, "M", path).at(0), path));
  out.K = static_cast<int>(parse_artifact_value(require_key(kv, "K", path).at(0), path));
  const double L = parse_artifact_value(require_key(kv, "L", path).at(0), path);
  const double U = parse_artifact_value(require_key(kv, "U", path).at(0), path);
  out.n_min = static_cast<std::size_t>(
      parse_artifact_value(require_key(kv, "n_min", path).at(0), path));
  out.seed = static_cast<std::uint64_t>(
      parse_artifact_value(require_key(kv, "seed", path).at(0), path));
  out.bounds = parse_bounds(require_key(kv, "bounds", path), path);
  out.partition.L = L;
  out.partition.U = U;
  out.partition.M = M;
  out.partition.edges.resize(M + 1);
  for (int m = 0; m <= M; ++m) {
    out.partition.edges[m] = L + (U - L) * static_cast<double>(m) / M;
  }
  out.fallback.alpha = out.alpha;
  out.fallback.bounds = out.bounds;
  out.fallback.n_cal = static_cast<std::size_t>(
      parse_artifact_value(require_key(kv, "fallback_n", path).at(0), path));
  out.fallback.s_hat =
      parse_artifact_value(require_key(kv, "fallback_s_hat", path).at(0), path);
  out.per_bin.resize(M);
  std::size_t seen = 0;
  for (const auto& tokens : bin_lines) {
    if (tokens.size() < 4 || tokens[1] != "n") {
      throw error(errc::io_error, path + ": malformed bin entry");
    }
    const int m = static_cast<int>(parse_artifact_value(tokens[0], path));
    if (m < 1 || m > M) {
      throw error(errc::io_error, path + ": bin index out of range");
    }
    AccBin& bin = out.per_bin[m - 1];
    bin.n = static_cast<std::size_t>(parse_artifact_value(tokens[2], path));
    if (tokens[3] == "fallback") {
      bin.fallback = true;
    } else if (tokens.size() == 8 && tokens[3] == "s_hat" && tokens[5] == "interval") {
      bin.s_hat = parse_artifact_value(tokens[4], path);
      bin.interval = Interval(parse_artifact_value(tokens[6], path),
                              parse_artifact_value(tokens[7], path));
    } else {
      throw error(errc::io_error, path + ": malformed bin entry");
    }
    ++seen;
  }
  if (seen != static_cast<std::size_t>(M)) {
    throw error(errc::io_error, path + ": expected " + std::to_string(M) + " bin entries");
  }
  return out;
}

}  // namespace cdpcal
