#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dml/errors.hpp"

namespace dml {

enum class ColumnRole { Outcome, Treatment, Instrument, Covariate };

const char* to_string(ColumnRole role);

struct Column {
  std::string name;
  Eigen::VectorXd values;
  ColumnRole role = ColumnRole::Covariate;
};

// Immutable column table with per-column roles. Construction validates the
// role layout (exactly one outcome, exactly one treatment, at most one
// instrument), equal column lengths, and rejects non-finite cells.
class Dataset {
 public:
  explicit Dataset(std::vector<Column> columns);

  Eigen::Index n_rows() const { return n_rows_; }
  const std::vector<Column>& columns() const { return columns_; }

  const Column& column(const std::string& name) const;
  bool has_column(const std::string& name) const;

  const Eigen::VectorXd& outcome() const { return columns_[outcome_idx_].values; }
  const Eigen::VectorXd& treatment() const { return columns_[treatment_idx_].values; }
  bool has_instrument() const { return instrument_idx_.has_value(); }
  const Eigen::VectorXd& instrument() const;

  std::size_t covariate_count() const;

 private:
  std::vector<Column> columns_;
  Eigen::Index n_rows_ = 0;
  std::size_t outcome_idx_ = 0;
  std::size_t treatment_idx_ = 0;
  std::optional<std::size_t> instrument_idx_;
};

// Deterministic K-fold partition: seeded uniform shuffle of row indices,
// then contiguous chunks; the first (n mod K) folds take the extra row.
struct SplitPlan {
  int k = 0;
  std::vector<int> assignments;  // fold id per row, in [0, k)
  std::uint64_t seed = 0;

  std::vector<Eigen::Index> fold_rows(int fold) const;
  std::vector<Eigen::Index> complement_rows(int fold) const;
};

SplitPlan make_split(Eigen::Index n_rows, int k, std::uint64_t seed);

// Row subset in ascending row order; duplicate indices are rejected.
Dataset select_rows(const Dataset& d, const std::vector<Eigen::Index>& rows);

// Column-stacked matrix of every column whose role is in `roles`,
// in declaration order.
Eigen::MatrixXd design_matrix(const Dataset& d, std::initializer_list<ColumnRole> roles);

}  // namespace dml
