#pragma once

#include <string>
#include <vector>

#include "cdpcal/core.hpp"

namespace cdpcal {

/// Label strata for conditional-coverage evaluation: edges[g] <= y <
/// edges[g+1] defines group g, the last group closed on the right. Labels
/// outside the edge range clamp to the outermost groups so every sample is
/// counted.
struct GroupScheme {
  std::vector<double> edges;       // G+1 strictly increasing values
  std::vector<std::string> names;  // G entries

  std::size_t group_of(double y) const;
};

/// Default severity strata: minimal [0,14), mild [14,20), moderate [20,29),
/// severe [29,63].
GroupScheme severity_groups();

struct GroupRow {
  std::string name;
  std::size_t count = 0;
  double coverage = 0.0;    // meaningless when count == 0; rendered as "na"
  double mean_width = 0.0;  // idem
};

/// One method's evaluation on one dataset.
struct EvaluationReport {
  std::string method;
  double picp = 0.0;
  double mpiw = 0.0;
  double mpiw_raw = 0.0;  // mean width before truncation to target bounds
  double ssc = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double crossing_rate = 0.0;  // fraction of raw quantile pairs with q_lo > q_hi
  std::size_t n_test = 0;
  std::vector<GroupRow> per_group;
};

/// Fraction of labels inside their interval (closed containment).
double picp(const std::vector<Interval>& intervals, const std::vector<double>& y);

/// Mean interval width.
double mpiw(const std::vector<Interval>& intervals);

/// Minimum per-group coverage over nonempty groups, grouping by label.
double ssc(const std::vector<Interval>& intervals, const std::vector<double>& y,
           const GroupScheme& scheme);

/// (MAE, RMSE) of point predictions.
std::pair<double, double> point_errors(const std::vector<double>& y_pred,
                                       const std::vector<double>& y_true);

/// Assemble a full report, including the per-group breakdown.
EvaluationReport evaluate(const std::string& method, const std::vector<Interval>& intervals,
                          const std::vector<double>& y_true,
                          const std::vector<double>& y_point,
                          const std::vector<double>& raw_widths, std::size_t crossing_count,
                          const GroupScheme& scheme);

}  // namespace cdpcal
