#pragma once

#include <Eigen/Dense>

#include "dml/learners.hpp"

namespace dml {

// Least-squares solution with classical inference pieces. X is used as
// given; callers append an intercept column themselves.
struct OlsSolution {
  Eigen::VectorXd coef;
  Eigen::VectorXd se;      // classical standard errors (sigma^2 (X'X)^-1)
  double sigma2 = 0.0;     // RSS / (n - p)
  double condition = 0.0;  // diag-ratio estimate from the pivoted QR
};

/// Throws NumericError (with the condition estimate) on rank deficiency.
OlsSolution ols_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      bool with_se = false);

/// Learner-contract OLS with intercept.
FitResult fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const LearnerSpec& spec);

}  // namespace dml
