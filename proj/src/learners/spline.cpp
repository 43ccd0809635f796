#include "dml/learners/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

namespace dml {

namespace detail {

BsplineBasis BsplineBasis::make(double lo, double hi, const Eigen::VectorXd& interior) {
  BsplineBasis b;
  b.lo = lo;
  b.hi = hi;
  const Eigen::Index m = interior.size();
  b.knots.resize(m + 8);
  for (int i = 0; i < 4; ++i) b.knots[i] = lo;
  for (Eigen::Index i = 0; i < m; ++i) b.knots[4 + i] = interior[i];
  for (int i = 0; i < 4; ++i) b.knots[4 + m + i] = hi;
  return b;
}

Eigen::MatrixXd BsplineBasis::evaluate(const Eigen::VectorXd& x) const {
  const Eigen::Index nb = size();
  const Eigen::Index n = x.size();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, nb);

  for (Eigen::Index r = 0; r < n; ++r) {
    const double t = std::clamp(x[r], lo, hi);
    // Knot span containing t; the closed right end belongs to the last span.
    Eigen::Index s = 3;
    while (s < nb - 1 && t >= knots[s + 1]) ++s;

    // Triangular recurrence: N holds the nonzero functions N_{s-j..s, j}.
    double N[4] = {1.0, 0.0, 0.0, 0.0};
    double left[4], right[4];
    for (int j = 1; j <= 3; ++j) {
      left[j] = t - knots[s + 1 - j];
      right[j] = knots[s + j] - t;
      double saved = 0.0;
      for (int q = 0; q < j; ++q) {
        const double denom = right[q + 1] + left[j - q];
        const double temp = denom > 0.0 ? N[q] / denom : 0.0;
        N[q] = saved + right[q + 1] * temp;
        saved = left[j - q] * temp;
      }
      N[j] = saved;
    }
    for (int i = 0; i <= 3; ++i) B(r, s - 3 + i) = N[i];
  }
  return B;
}

}  // namespace detail

namespace {

struct FeatureBlock {
  bool linear = false;          // low-cardinality features enter linearly
  detail::BsplineBasis basis;   // used when !linear
  double mean = 0.0, scale = 1.0;  // standardization for linear entries
};

class SplineAdditiveModel : public FittedModel {
 public:
  SplineAdditiveModel(Eigen::Index features, std::vector<FeatureBlock> blocks,
                      Eigen::VectorXd col_mean, Eigen::VectorXd coef, double intercept)
      : FittedModel(features),
        blocks_(std::move(blocks)),
        col_mean_(std::move(col_mean)),
        coef_(std::move(coef)),
        intercept_(intercept) {}

  static Eigen::MatrixXd build_design(const std::vector<FeatureBlock>& blocks,
                                      const Eigen::MatrixXd& X) {
    Eigen::Index width = 0;
    for (const auto& b : blocks) width += b.linear ? 1 : b.basis.size();
    Eigen::MatrixXd Z(X.rows(), width);
    Eigen::Index at = 0;
    for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(blocks.size()); ++f) {
      const FeatureBlock& b = blocks[static_cast<std::size_t>(f)];
      if (b.linear) {
        Z.col(at++) = (X.col(f).array() - b.mean) / b.scale;
      } else {
        Z.middleCols(at, b.basis.size()) = b.basis.evaluate(X.col(f));
        at += b.basis.size();
      }
    }
    return Z;
  }

 private:
  Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override {
    Eigen::MatrixXd Z = build_design(blocks_, X);
    Z.rowwise() -= col_mean_.transpose();
    return (Z * coef_).array() + intercept_;
  }

  std::vector<FeatureBlock> blocks_;
  Eigen::VectorXd col_mean_;  // training means of the design columns
  Eigen::VectorXd coef_;
  double intercept_;
};

Eigen::VectorXd interior_quantiles(Eigen::VectorXd col, int n_interior) {
  std::sort(col.data(), col.data() + col.size());
  Eigen::VectorXd q(n_interior);
  const double n1 = static_cast<double>(col.size() - 1);
  for (int i = 0; i < n_interior; ++i) {
    const double prob = static_cast<double>(i + 1) / (n_interior + 1);
    const double h = prob * n1;
    const auto k = static_cast<Eigen::Index>(std::floor(h));
    const double frac = h - static_cast<double>(k);
    q[i] = k + 1 < col.size() ? col[k] * (1.0 - frac) + col[k + 1] * frac : col[k];
  }
  return q;
}

}  // namespace

FitResult fit_spline_additive(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const LearnerSpec& spec) {
  const auto& prm = std::get<SplineParams>(spec.params);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (p < 1) throw ConfigError("spline: need at least one feature");

  std::vector<FeatureBlock> blocks(static_cast<std::size_t>(p));
  Eigen::Index width = 0;
  for (Eigen::Index f = 0; f < p; ++f) {
    FeatureBlock& b = blocks[static_cast<std::size_t>(f)];
    std::set<double> distinct;
    for (Eigen::Index r = 0; r < n && distinct.size() <= 8; ++r) distinct.insert(X(r, f));
    const double lo = X.col(f).minCoeff();
    const double hi = X.col(f).maxCoeff();
    if (static_cast<int>(distinct.size()) <= 4 || hi - lo < 1e-12) {
      b.linear = true;
      b.mean = X.col(f).mean();
      const double sd = std::sqrt((X.col(f).array() - b.mean).square().sum() /
                                  static_cast<double>(n));
      b.scale = sd > 1e-12 ? sd : 1.0;
      width += 1;
    } else {
      const int interior = prm.basis_per_feature - 4;
      b.basis = detail::BsplineBasis::make(lo, hi, interior_quantiles(X.col(f), interior));
      width += b.basis.size();
    }
  }

  if (width + 1 >= n) {
    throw NumericError("spline: basis dimension " + std::to_string(width + 1) +
                       " >= " + std::to_string(n) + " rows; reduce features or basis size");
  }

  Eigen::MatrixXd Z = SplineAdditiveModel::build_design(blocks, X);
  const Eigen::VectorXd col_mean = Z.colwise().mean();
  Z.rowwise() -= col_mean.transpose();
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;

  // Ridge path via one SVD; GCV(lambda) = n * RSS / (n - tr(H))^2.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd d = svd.singularValues();
  const Eigen::VectorXd uty = svd.matrixU().transpose() * yc;
  const double yc_sq = yc.squaredNorm();

  FitResult out;
  out.tuning.parameter = "ridge_lambda";
  const int grid = prm.gcv_grid_size;
  for (int i = 0; i < grid; ++i) {
    const double t = grid == 1 ? 0.0 : static_cast<double>(i) / (grid - 1);
    const double lambda =
        std::exp(std::log(prm.lambda_min) + t * (std::log(prm.lambda_max) - std::log(prm.lambda_min)));
    double rss = yc_sq;
    double edf = 1.0;  // intercept
    for (Eigen::Index j = 0; j < d.size(); ++j) {
      const double d2 = d[j] * d[j];
      const double shrink = d2 / (d2 + lambda);
      rss += (shrink * shrink - 2.0 * shrink) * uty[j] * uty[j];
      edf += shrink;
    }
    const double denom = static_cast<double>(n) - edf;
    const double gcv = denom > 0 ? static_cast<double>(n) * rss / (denom * denom)
                                 : std::numeric_limits<double>::infinity();
    out.tuning.candidates.push_back(lambda);
    out.tuning.errors.push_back(gcv);
  }
  out.tuning.choose_min();
  const double lambda = out.tuning.chosen;

  Eigen::VectorXd shrunk(d.size());
  for (Eigen::Index j = 0; j < d.size(); ++j)
    shrunk[j] = d[j] > 0.0 ? d[j] / (d[j] * d[j] + lambda) : 0.0;
  const Eigen::VectorXd coef = svd.matrixV() * shrunk.asDiagonal() * uty;

  out.model = std::make_shared<SplineAdditiveModel>(p, std::move(blocks), col_mean, coef, y_mean);
  return out;
}

}  // namespace dml
