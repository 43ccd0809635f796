#include "dml/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dml/rng.hpp"

namespace dml {

const char* to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::Outcome: return "outcome";
    case ColumnRole::Treatment: return "treatment";
    case ColumnRole::Instrument: return "instrument";
    case ColumnRole::Covariate: return "covariate";
  }
  return "?";
}

Dataset::Dataset(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw ConfigError("dataset: no columns");
  n_rows_ = columns_[0].values.size();

  int n_outcome = 0, n_treatment = 0, n_instrument = 0;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const Column& col = columns_[c];
    if (col.values.size() != n_rows_) {
      throw ConfigError("dataset: column '" + col.name + "' has " +
                        std::to_string(col.values.size()) + " rows, expected " +
                        std::to_string(n_rows_));
    }
    for (Eigen::Index r = 0; r < col.values.size(); ++r) {
      if (!std::isfinite(col.values[r])) {
        throw ConfigError("dataset: non-finite value in column '" + col.name +
                          "' at row " + std::to_string(r));
      }
    }
    switch (col.role) {
      case ColumnRole::Outcome:
        ++n_outcome;
        outcome_idx_ = c;
        break;
      case ColumnRole::Treatment:
        ++n_treatment;
        treatment_idx_ = c;
        break;
      case ColumnRole::Instrument:
        ++n_instrument;
        instrument_idx_ = c;
        break;
      case ColumnRole::Covariate:
        break;
    }
  }
  if (n_outcome != 1)
    throw ConfigError("dataset: expected exactly one outcome column, got " +
                      std::to_string(n_outcome));
  if (n_treatment != 1)
    throw ConfigError("dataset: expected exactly one treatment column, got " +
                      std::to_string(n_treatment));
  if (n_instrument > 1)
    throw ConfigError("dataset: at most one instrument column allowed, got " +
                      std::to_string(n_instrument));
}

const Column& Dataset::column(const std::string& name) const {
  for (const Column& c : columns_)
    if (c.name == name) return c;
  throw ConfigError("dataset: no column named '" + name + "'");
}

bool Dataset::has_column(const std::string& name) const {
  for (const Column& c : columns_)
    if (c.name == name) return true;
  return false;
}

const Eigen::VectorXd& Dataset::instrument() const {
  if (!instrument_idx_) throw ConfigError("dataset: no instrument column");
  return columns_[*instrument_idx_].values;
}

std::size_t Dataset::covariate_count() const {
  std::size_t n = 0;
  for (const Column& c : columns_)
    if (c.role == ColumnRole::Covariate) ++n;
  return n;
}

std::vector<Eigen::Index> SplitPlan::fold_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < assignments.size(); ++r)
    if (assignments[r] == fold) rows.push_back(static_cast<Eigen::Index>(r));
  return rows;
}

std::vector<Eigen::Index> SplitPlan::complement_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < assignments.size(); ++r)
    if (assignments[r] != fold) rows.push_back(static_cast<Eigen::Index>(r));
  return rows;
}

SplitPlan make_split(Eigen::Index n_rows, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<Eigen::Index>(k) > n_rows) {
    throw ConfigError("make_split: K must satisfy 2 <= K <= n_rows (K=" +
                      std::to_string(k) + ", n=" + std::to_string(n_rows) + ")");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_rows));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(i + 1));
    std::swap(order[i], order[j]);
  }

  SplitPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(static_cast<std::size_t>(n_rows), -1);
  const Eigen::Index base = n_rows / k;
  const Eigen::Index remainder = n_rows % k;
  std::size_t pos = 0;
  for (int fold = 0; fold < k; ++fold) {
    const Eigen::Index size = base + (fold < remainder ? 1 : 0);
    for (Eigen::Index i = 0; i < size; ++i)
      plan.assignments[static_cast<std::size_t>(order[pos++])] = fold;
  }
  return plan;
}

Dataset select_rows(const Dataset& d, const std::vector<Eigen::Index>& rows) {
  std::vector<Eigen::Index> sorted = rows;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 0 || sorted[i] >= d.n_rows())
      throw ConfigError("select_rows: index " + std::to_string(sorted[i]) +
                        " out of range [0, " + std::to_string(d.n_rows()) + ")");
    if (i > 0 && sorted[i] == sorted[i - 1])
      throw ConfigError("select_rows: duplicate index " + std::to_string(sorted[i]));
  }
  std::vector<Column> out;
  out.reserve(d.columns().size());
  for (const Column& c : d.columns()) {
    Column nc{c.name, Eigen::VectorXd(static_cast<Eigen::Index>(sorted.size())), c.role};
    for (std::size_t i = 0; i < sorted.size(); ++i) nc.values[static_cast<Eigen::Index>(i)] = c.values[sorted[i]];
    out.push_back(std::move(nc));
  }
  return Dataset(std::move(out));
}

Eigen::MatrixXd design_matrix(const Dataset& d, std::initializer_list<ColumnRole> roles) {
  std::vector<const Column*> picked;
  for (const Column& c : d.columns()) {
    for (ColumnRole r : roles) {
      if (c.role == r) {
        picked.push_back(&c);
        break;
      }
    }
  }
  if (picked.empty()) throw ConfigError("design_matrix: no columns match the requested roles");
  Eigen::MatrixXd m(d.n_rows(), static_cast<Eigen::Index>(picked.size()));
  for (std::size_t j = 0; j < picked.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = picked[j]->values;
  return m;
}

}  // namespace dml
