#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdpcal/cli.hpp"

namespace {

struct BoundsOptions {
  std::pair<double, double> value{0.0, 63.0};
  std::vector<CLI::Option*> options;

  bool given() const {
    for (const auto* opt : options) {
      if (opt->count() > 0) return true;
    }
    return false;
  }
};

void add_common_flags(CLI::App* cmd, cdpcal::RunConfig& cfg, BoundsOptions& bounds,
                      bool with_method) {
  if (with_method) {
    cmd->add_option("--method", cfg.method, "cdp|cdp-acc|cqr|qr|gaussian")
        ->capture_default_str();
  }
  cmd->add_option("--alpha", cfg.alpha, "miscoverage rate in (0,1)")->capture_default_str();
  cmd->add_option("--cal", cfg.cal_path, "calibration predictions file (csv)");
  cmd->add_option("--test", cfg.test_path, "test predictions file (csv)");
  cmd->add_option("--scenario", cfg.scenario,
                  "named synthetic scenario instead of input files");
  cmd->add_option("--schema", cfg.schema, "input schema: point|quantile|gaussian");
  cmd->add_option("--bins", cfg.bins, "prediction bins M")->capture_default_str();
  cmd->add_option("--hist-bins", cfg.hist_bins, "histogram cells K")->capture_default_str();
  bounds.options.push_back(
      cmd->add_option("--bounds", bounds.value, "target bounds LO,HI")->delimiter(','));
  cmd->add_flag("--bdi", cfg.bdi, "severity-score setup: bounds 0,63");
  cmd->add_option("--n-min", cfg.n_min, "minimum bin occupancy before fallback")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  cmd->add_option("--n-cal", cfg.n_cal, "scenario calibration size")->capture_default_str();
  cmd->add_option("--n-test", cfg.n_test, "scenario test size")->capture_default_str();
  cmd->add_option("--view-scale", cfg.view_scale,
                  "scale on scenario quantile/gaussian spreads (<1 = overconfident)")
      ->capture_default_str();
  cmd->add_option("--out", cfg.out, "output report path");
  cmd->add_option("--format", cfg.format, "csv|markdown")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal interval calibration toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cdpcal 0.1.0");

  cdpcal::RunConfig cfg;
  BoundsOptions bounds;
  std::vector<std::string> methods;
  std::vector<int> m_values = {2, 4, 6, 8, 10, 12, 14, 16, 18, 20};

  CLI::App* run = app.add_subcommand("run", "calibrate and evaluate one method");
  add_common_flags(run, cfg, bounds, true);

  CLI::App* compare = app.add_subcommand("compare", "evaluate several methods on one dataset");
  add_common_flags(compare, cfg, bounds, false);
  compare->add_option("--methods", methods, "comma-separated method list")
      ->delimiter(',')
      ->required();

  CLI::App* sweep = app.add_subcommand("sweep-m", "coverage/width versus bin count M");
  add_common_flags(sweep, cfg, bounds, true);
  sweep->add_option("--m-values", m_values, "comma-separated M values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (bounds.given()) cfg.bounds_pair = bounds.value;

  if (run->parsed()) {
    return cdpcal::cmd_run(cfg, std::cerr);
  }
  if (compare->parsed()) {
    std::vector<cdpcal::RunConfig> configs;
    for (const auto& method : methods) {
      cdpcal::RunConfig c = cfg;
      c.method = method;
      configs.push_back(std::move(c));
    }
    return cdpcal::cmd_compare(configs, cfg.out, std::cerr);
  }
  if (sweep->parsed()) {
    // default to the only method the sweep applies to; an explicit
    // conflicting --method still fails validation loudly
    if (sweep->get_option("--method")->count() == 0) cfg.method = "cdp-acc";
    return cdpcal::cmd_sweep_m(cfg, m_values, std::cerr);
  }
  return 1;
}
