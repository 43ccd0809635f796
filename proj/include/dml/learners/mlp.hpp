#pragma once

#include <Eigen/Dense>

#include "dml/learners.hpp"

namespace dml {

/// Single-hidden-layer perceptron (sigmoid units, linear output) trained by
/// full-batch gradient descent with backtracking line search. Weight decay
/// is selected from a grid by cross-validation.
FitResult fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const LearnerSpec& spec);

namespace detail {

// Loss and gradient of the packed parameter vector
// [W1 (p*h), b1 (h), w2 (h), b2] on standardized inputs:
//   E = sum_i (yhat_i - y_i)^2 + decay * ||theta||^2.
double mlp_loss_grad(const Eigen::VectorXd& theta, const Eigen::MatrixXd& Xs,
                     const Eigen::VectorXd& y, int hidden, double decay,
                     Eigen::VectorXd* grad);

Eigen::VectorXd mlp_forward(const Eigen::VectorXd& theta, const Eigen::MatrixXd& Xs,
                            int hidden);

}  // namespace detail

}  // namespace dml
