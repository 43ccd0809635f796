#pragma once

#include <Eigen/Dense>

#include "dml/learners.hpp"

namespace dml {

/// Squared-error gradient boosting with exact greedy CART base learners.
/// The round count is selected by cross-validation with patience-based
/// early stopping, then the model is refit on all rows at that count.
FitResult fit_gradient_boost(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const LearnerSpec& spec);

}  // namespace dml
