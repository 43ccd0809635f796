#pragma once

#include <Eigen/Dense>

#include "dml/learners.hpp"

namespace dml {

/// Bagged regression forest; mtry is tuned by out-of-bag error over the
/// candidate set (default {p/3, sqrt(p), p/2, p}, deduplicated, minimum 1).
FitResult fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const LearnerSpec& spec);

namespace detail {
std::vector<int> default_mtry_candidates(int p);
}

}  // namespace dml
