#include "dml/learners/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "dml/dataset.hpp"
#include "dml/rng.hpp"

namespace dml {

namespace {

class LassoModel : public FittedModel {
 public:
  LassoModel(Eigen::Index features, double intercept, Eigen::VectorXd coef, bool warn)
      : FittedModel(features), intercept_(intercept), coef_(std::move(coef)) {
    warning_ = warn;
  }

 private:
  Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override {
    return (X * coef_).array() + intercept_;
  }
  double intercept_;
  Eigen::VectorXd coef_;  // original scale
};

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

namespace detail {

double lasso_lambda_max(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& yc) {
  const double n = static_cast<double>(Xs.rows());
  return (Xs.transpose() * yc).cwiseAbs().maxCoeff() / n;
}

Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& yc,
                         double lambda, Eigen::VectorXd beta,
                         std::vector<double>* objective_trace) {
  const Eigen::Index p = Xs.cols();
  const double n = static_cast<double>(Xs.rows());
  if (beta.size() != p) beta = Eigen::VectorXd::Zero(p);

  // Per-column quadratic term (columns are standardized to variance 1 when
  // the column has variance at all; zero-variance columns stay at 0).
  Eigen::VectorXd col_sq(p);
  for (Eigen::Index j = 0; j < p; ++j) col_sq[j] = Xs.col(j).squaredNorm() / n;

  Eigen::VectorXd resid = yc - Xs * beta;
  const int max_sweeps = 1000;
  const double tol = 1e-8;

  double prev_obj = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq[j] <= 0.0) continue;
      const double old = beta[j];
      const double rho = Xs.col(j).dot(resid) / n + col_sq[j] * old;
      const double next = soft_threshold(rho, lambda) / col_sq[j];
      if (next != old) {
        resid += Xs.col(j) * (old - next);
        beta[j] = next;
        max_delta = std::max(max_delta, std::abs(next - old));
      }
    }
    if (objective_trace) {
      const double obj = resid.squaredNorm() / (2.0 * n) + lambda * beta.cwiseAbs().sum();
      objective_trace->push_back(obj);
      prev_obj = obj;
    }
    if (max_delta < tol) break;
  }
  (void)prev_obj;
  return beta;
}

}  // namespace detail

FitResult fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const LearnerSpec& spec) {
  const auto& prm = std::get<LassoParams>(spec.params);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n < 2) throw ConfigError("lasso: need at least 2 rows");

  const double y_mean = y.mean();
  const double y_var = (y.array() - y_mean).square().sum() / static_cast<double>(n);

  FitResult out;
  out.tuning.parameter = "lambda";

  // Constant outcome: intercept-only model, no path to tune.
  if (y_var < 1e-24) {
    out.model = std::make_shared<LassoModel>(p, y_mean, Eigen::VectorXd::Zero(p), false);
    out.tuning.candidates = {0.0};
    out.tuning.errors = {0.0};
    out.tuning.chosen = 0.0;
    return out;
  }

  const Standardizer stz = Standardizer::fit(X);
  Eigen::MatrixXd Xs = stz.apply(X);
  for (Eigen::Index j : stz.zero_variance) Xs.col(j).setZero();  // excluded from the fit
  const Eigen::VectorXd yc = y.array() - y_mean;

  std::vector<double> lambdas;
  if (prm.fixed_lambda) {
    lambdas = {*prm.fixed_lambda};
  } else {
    const double lmax = detail::lasso_lambda_max(Xs, yc);
    const double lmin = lmax * prm.lambda_min_ratio;
    const int m = prm.path_length;
    lambdas.resize(m);
    if (m == 1) {
      lambdas[0] = lmax;
    } else {
      const double step = (std::log(lmax) - std::log(lmin)) / (m - 1);
      for (int i = 0; i < m; ++i) lambdas[i] = std::exp(std::log(lmax) - step * i);
    }
  }

  double chosen_lambda = lambdas.front();
  if (lambdas.size() > 1) {
    const int folds = static_cast<int>(std::min<Eigen::Index>(prm.cv_folds, n));
    const SplitPlan plan = make_split(n, folds, mix_seed(spec.tuning_seed, 0xCF01));
    Eigen::VectorXd cv_err = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lambdas.size()));
    for (int k = 0; k < folds; ++k) {
      const auto test_rows = plan.fold_rows(k);
      const auto train_rows = plan.complement_rows(k);
      Eigen::MatrixXd Xtr(train_rows.size(), p), Xte(test_rows.size(), p);
      Eigen::VectorXd ytr(train_rows.size()), yte(test_rows.size());
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        Xtr.row(static_cast<Eigen::Index>(i)) = X.row(train_rows[i]);
        ytr[static_cast<Eigen::Index>(i)] = y[train_rows[i]];
      }
      for (std::size_t i = 0; i < test_rows.size(); ++i) {
        Xte.row(static_cast<Eigen::Index>(i)) = X.row(test_rows[i]);
        yte[static_cast<Eigen::Index>(i)] = y[test_rows[i]];
      }
      const Standardizer stz_k = Standardizer::fit(Xtr);
      Eigen::MatrixXd Xtr_s = stz_k.apply(Xtr);
      for (Eigen::Index j : stz_k.zero_variance) Xtr_s.col(j).setZero();
      Eigen::MatrixXd Xte_s = stz_k.apply(Xte);
      for (Eigen::Index j : stz_k.zero_variance) Xte_s.col(j).setZero();
      const double ytr_mean = ytr.mean();
      const Eigen::VectorXd ytr_c = ytr.array() - ytr_mean;

      Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);  // warm start down the path
      for (std::size_t li = 0; li < lambdas.size(); ++li) {
        beta = detail::lasso_cd(Xtr_s, ytr_c, lambdas[li], beta);
        const Eigen::VectorXd pred = (Xte_s * beta).array() + ytr_mean;
        cv_err[static_cast<Eigen::Index>(li)] +=
            (pred - yte).squaredNorm() / static_cast<double>(n);
      }
    }
    out.tuning.candidates = lambdas;
    out.tuning.errors.assign(cv_err.data(), cv_err.data() + cv_err.size());
    out.tuning.choose_min();
    chosen_lambda = out.tuning.chosen;
  } else {
    out.tuning.candidates = lambdas;
    out.tuning.errors = {0.0};
    out.tuning.chosen = lambdas.front();
  }

  // Final fit on all rows, warm-started along the path down to the choice.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (double l : lambdas) {
    if (l < chosen_lambda) break;
    beta = detail::lasso_cd(Xs, yc, l, beta);
    if (l == chosen_lambda) break;
  }

  // Back to the original scale.
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
  double intercept = y_mean;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (stz.scale[j] > 0.0 && beta[j] != 0.0) {
      coef[j] = beta[j] / stz.scale[j];
      intercept -= coef[j] * stz.mean[j];
    }
  }
  const bool warn = !stz.zero_variance.empty();
  out.model = std::make_shared<LassoModel>(p, intercept, std::move(coef), warn);
  return out;
}

}  // namespace dml
