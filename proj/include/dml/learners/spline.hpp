#pragma once

#include <Eigen/Dense>

#include "dml/learners.hpp"

namespace dml {

/// Additive model: per-feature cubic B-spline bases with a shared ridge
/// penalty selected by generalized cross-validation. Features with few
/// distinct values enter linearly instead of through a basis.
FitResult fit_spline_additive(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const LearnerSpec& spec);

namespace detail {

// Clamped cubic B-spline basis on [lo, hi] with interior knots at the given
// positions; evaluates `n_basis = interior + 4` functions per point.
// Inputs are clamped to [lo, hi] before evaluation.
struct BsplineBasis {
  double lo = 0.0, hi = 1.0;
  Eigen::VectorXd knots;  // full clamped knot vector

  static BsplineBasis make(double lo, double hi, const Eigen::VectorXd& interior);
  Eigen::Index size() const { return knots.size() - 4; }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

}  // namespace detail

}  // namespace dml
