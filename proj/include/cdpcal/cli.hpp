#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cdpcal {

/// One command invocation, fully resolved from flags. Validation happens
/// before any file is touched; method-specific fields are ignored by the
/// other methods.
struct RunConfig {
  std::string method = "cdp";  // cdp | cdp-acc | cqr | qr | gaussian
  double alpha = 0.1;
  std::string cal_path;
  std::string test_path;
  std::string scenario;  // named synthetic scenario instead of files
  std::string schema;    // point | quantile | gaussian; empty = implied by method
  int bins = 14;         // prediction bins M (cdp-acc)
  int hist_bins = 63;    // histogram cells K (cdp-acc)
  std::optional<std::pair<double, double>> bounds_pair;
  bool bdi = false;  // shorthand for bounds 0..63 on the severity scale
  std::size_t n_min = 10;
  std::uint64_t seed = 1;
  std::size_t n_cal = 1000;   // scenario mode sizes
  std::size_t n_test = 5000;
  double view_scale = 1.0;  // scenario quantile/gaussian output scaling
  std::string out;
  std::string format = "csv";
};

/// Exit codes shared by all commands: 0 success, 1 validation failure,
/// 2 ingestion failure, 3 internal error. Failures print one diagnostic
/// line to `diag`.
int cmd_run(const RunConfig& config, std::ostream& diag);

/// One row per method over identical data; rows ordered by method name.
/// Output goes to out_path in the first config's format.
int cmd_compare(const std::vector<RunConfig>& configs, const std::string& out_path,
                std::ostream& diag);

/// Calibrate/evaluate per M on a seeded half split of the calibration set,
/// marking the lowest-MPIW M among rows with PICP >= 1 - alpha.
int cmd_sweep_m(const RunConfig& base, const std::vector<int>& m_values, std::ostream& diag);

}  // namespace cdpcal
