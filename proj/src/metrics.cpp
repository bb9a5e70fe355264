#include "cdpcal/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace cdpcal {

namespace {

void require_same_nonempty(std::size_t a, std::size_t b, const char* who) {
  if (a != b) {
    throw error(errc::length_mismatch, std::string(who) + ": input lengths differ");
  }
  if (a == 0) {
    throw error(errc::empty_input, std::string(who) + ": empty input");
  }
}

}  // namespace

std::size_t GroupScheme::group_of(double y) const {
  const std::size_t g = names.size();
  auto it = std::upper_bound(edges.begin(), edges.end(), y);
  auto idx = static_cast<std::ptrdiff_t>(it - edges.begin()) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(g) - 1);
  return static_cast<std::size_t>(idx);
}

GroupScheme severity_groups() {
  return GroupScheme{{0.0, 14.0, 20.0, 29.0, 63.0}, {"minimal", "mild", "moderate", "severe"}};
}

double picp(const std::vector<Interval>& intervals, const std::vector<double>& y) {
  require_same_nonempty(intervals.size(), y.size(), "picp");
  std::size_t covered = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (intervals[i].contains(y[i])) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(y.size());
}

double mpiw(const std::vector<Interval>& intervals) {
  if (intervals.empty()) {
    throw error(errc::empty_input, "mpiw: empty input");
  }
  double total = 0.0;
  for (const auto& iv : intervals) total += iv.width();
  return total / static_cast<double>(intervals.size());
}

double ssc(const std::vector<Interval>& intervals, const std::vector<double>& y,
           const GroupScheme& scheme) {
  require_same_nonempty(intervals.size(), y.size(), "ssc");
  if (scheme.names.empty() || scheme.edges.size() != scheme.names.size() + 1) {
    throw error(errc::invalid_argument, "ssc: malformed group scheme");
  }
  std::vector<std::size_t> count(scheme.names.size(), 0);
  std::vector<std::size_t> covered(scheme.names.size(), 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t g = scheme.group_of(y[i]);
    ++count[g];
    if (intervals[i].contains(y[i])) ++covered[g];
  }
  double worst = 1.0;
  for (std::size_t g = 0; g < count.size(); ++g) {
    if (count[g] == 0) continue;
    worst = std::min(worst, static_cast<double>(covered[g]) / static_cast<double>(count[g]));
  }
  return worst;
}

std::pair<double, double> point_errors(const std::vector<double>& y_pred,
                                       const std::vector<double>& y_true) {
  require_same_nonempty(y_pred.size(), y_true.size(), "point_errors");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double d = y_pred[i] - y_true[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const auto n = static_cast<double>(y_true.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

EvaluationReport evaluate(const std::string& method, const std::vector<Interval>& intervals,
                          const std::vector<double>& y_true,
                          const std::vector<double>& y_point,
                          const std::vector<double>& raw_widths, std::size_t crossing_count,
                          const GroupScheme& scheme) {
  EvaluationReport rep;
  rep.method = method;
  rep.n_test = y_true.size();
  rep.picp = picp(intervals, y_true);
  rep.mpiw = mpiw(intervals);
  rep.ssc = ssc(intervals, y_true, scheme);
  std::tie(rep.mae, rep.rmse) = point_errors(y_point, y_true);
  require_same_nonempty(raw_widths.size(), y_true.size(), "evaluate");
  double raw_total = 0.0;
  for (double w : raw_widths) raw_total += w;
  rep.mpiw_raw = raw_total / static_cast<double>(raw_widths.size());
  rep.crossing_rate = static_cast<double>(crossing_count) / static_cast<double>(y_true.size());

  std::vector<std::size_t> count(scheme.names.size(), 0);
  std::vector<std::size_t> covered(scheme.names.size(), 0);
  std::vector<double> width(scheme.names.size(), 0.0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const std::size_t g = scheme.group_of(y_true[i]);
    ++count[g];
    if (intervals[i].contains(y_true[i])) ++covered[g];
    width[g] += intervals[i].width();
  }
  for (std::size_t g = 0; g < scheme.names.size(); ++g) {
    GroupRow row;
    row.name = scheme.names[g];
    row.count = count[g];
    if (count[g] > 0) {
      row.coverage = static_cast<double>(covered[g]) / static_cast<double>(count[g]);
      row.mean_width = width[g] / static_cast<double>(count[g]);
    }
    rep.per_group.push_back(std::move(row));
  }
  return rep;
}

}  // namespace cdpcal
