#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dml/engine.hpp"

namespace dml {

// Monte-Carlo summary of one scenario cell x method.
struct CellSummary {
  std::string cell;
  std::string method;
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double bias = 0.0;  // mean - truth
  double mae = 0.0;   // mean |estimate - truth|
  double mean_mse_w = 0.0;
  double mean_mse_y = 0.0;
  double median_se = 0.0;
};

struct BoxplotStats {
  double whisker_lo = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_hi = 0.0;
  std::vector<double> outliers;  // beyond 1.5 IQR whiskers
};

/// Order statistics are exact; quartiles use type-7 interpolation.
CellSummary summarize(const std::vector<double>& estimates, double truth);

BoxplotStats boxplot_stats(std::vector<double> values);

/// Percentage outcome change per treatment unit at the given mean level,
/// via the derivative of the squared treatment term: 100 * 2 * beta * level.
double effect_at_mean(double beta, double mean_level);

struct PredictivenessRow {
  std::string method;
  double mse_w = 0.0;
  double mse_y = 0.0;
  double estimate = 0.0;
  std::optional<double> abs_bias;  // when truth is known
};

/// Rows sorted by descending mse_y; stable for equal keys.
std::vector<PredictivenessRow> predictiveness_table(
    const std::vector<std::pair<std::string, EstimateRecord>>& records,
    std::optional<double> truth);

/// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

double quantile_type7(std::vector<double> values, double prob);

}  // namespace dml
