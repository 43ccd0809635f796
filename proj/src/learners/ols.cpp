#include "dml/learners/ols.hpp"

#include <cmath>
#include <limits>

namespace dml {

namespace {

class OlsModel : public FittedModel {
 public:
  OlsModel(Eigen::Index features, Eigen::VectorXd coef)
      : FittedModel(features), coef_(std::move(coef)) {}

 private:
  Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override {
    return (X * coef_.tail(coef_.size() - 1)).array() + coef_[0];
  }
  Eigen::VectorXd coef_;  // [intercept, slopes...]
};

}  // namespace

OlsSolution ols_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool with_se) {
  if (X.rows() != y.size()) throw ConfigError("ols: rows(X) != len(y)");
  if (X.rows() < X.cols()) {
    throw NumericError("ols: underdetermined system (" + std::to_string(X.rows()) +
                       " rows, " + std::to_string(X.cols()) + " columns)");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd& R = qr.matrixR();
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double d = std::abs(R(j, j));
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
  }
  const double cond = dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
  if (qr.rank() < X.cols() || cond > 1e12) {
    throw NumericError("ols: rank-deficient design (rank " + std::to_string(qr.rank()) +
                       " of " + std::to_string(X.cols()) +
                       ", condition estimate " + std::to_string(cond) + ")");
  }

  OlsSolution sol;
  sol.coef = qr.solve(y);
  sol.condition = cond;

  if (with_se) {
    const Eigen::VectorXd resid = y - X * sol.coef;
    const Eigen::Index dof = X.rows() - X.cols();
    sol.sigma2 = dof > 0 ? resid.squaredNorm() / static_cast<double>(dof) : 0.0;
    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
    sol.se = (sol.sigma2 * xtx_inv.diagonal().array()).sqrt();
  }
  return sol;
}

FitResult fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const LearnerSpec& spec) {
  (void)spec;
  Eigen::MatrixXd Xa(X.rows(), X.cols() + 1);
  Xa.col(0).setOnes();
  Xa.rightCols(X.cols()) = X;
  OlsSolution sol = ols_solve(Xa, y, false);

  FitResult out;
  out.model = std::make_shared<OlsModel>(X.cols(), std::move(sol.coef));
  out.tuning.parameter = "none";
  return out;
}

}  // namespace dml
