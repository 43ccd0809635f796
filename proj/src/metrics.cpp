#include "dml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dml {

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw ConfigError("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

CellSummary summarize(const std::vector<double>& estimates, double truth) {
  if (estimates.empty()) throw ConfigError("summarize: empty estimate vector");
  CellSummary s;
  s.count = estimates.size();
  s.mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) /
           static_cast<double>(estimates.size());
  s.median = median(estimates);
  s.q1 = quantile_type7(estimates, 0.25);
  s.q3 = quantile_type7(estimates, 0.75);
  s.bias = s.mean - truth;
  double mae = 0.0;
  for (double e : estimates) mae += std::abs(e - truth);
  s.mae = mae / static_cast<double>(estimates.size());
  return s;
}

BoxplotStats boxplot_stats(std::vector<double> values) {
  if (values.empty()) throw ConfigError("boxplot_stats: empty input");
  BoxplotStats b;
  b.q1 = quantile_type7(values, 0.25);
  b.median = quantile_type7(values, 0.50);
  b.q3 = quantile_type7(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  std::sort(values.begin(), values.end());
  b.whisker_lo = b.q1;
  b.whisker_hi = b.q3;
  for (double v : values) {
    if (v >= lo_fence) {
      b.whisker_lo = v;  // smallest value within the fence
      break;
    }
  }
  for (auto it = values.rbegin(); it != values.rend(); ++it) {
    if (*it <= hi_fence) {
      b.whisker_hi = *it;
      break;
    }
  }
  for (double v : values)
    if (v < lo_fence || v > hi_fence) b.outliers.push_back(v);
  return b;
}

double effect_at_mean(double beta, double mean_level) {
  return 100.0 * 2.0 * beta * mean_level;
}

std::vector<PredictivenessRow> predictiveness_table(
    const std::vector<std::pair<std::string, EstimateRecord>>& records,
    std::optional<double> truth) {
  std::vector<PredictivenessRow> rows;
  rows.reserve(records.size());
  for (const auto& [name, rec] : records) {
    PredictivenessRow r;
    r.method = name;
    r.mse_w = rec.mse_w;
    r.mse_y = rec.mse_y;
    r.estimate = rec.theta;
    if (truth) r.abs_bias = std::abs(rec.theta - *truth);
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PredictivenessRow& a, const PredictivenessRow& b) {
                     return a.mse_y > b.mse_y;
                   });
  return rows;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw ConfigError("spearman: need two equally sized vectors of length >= 2");
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

}  // namespace dml
