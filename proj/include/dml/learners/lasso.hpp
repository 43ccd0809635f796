#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dml/learners.hpp"

namespace dml {

/// Coordinate-descent lasso on internally standardized features; the
/// penalty is chosen by K-fold cross-validation on a log-spaced path.
FitResult fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const LearnerSpec& spec);

namespace detail {

// One coordinate-descent solve at a fixed lambda on pre-standardized data
// (columns mean 0 / variance 1, y centered). Objective is
// (1/2n)||y - Xb||^2 + lambda * ||b||_1. When `objective_trace` is given it
// records the objective after every full sweep.
Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& yc,
                         double lambda, Eigen::VectorXd beta_start,
                         std::vector<double>* objective_trace = nullptr);

double lasso_lambda_max(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& yc);

}  // namespace detail

}  // namespace dml
