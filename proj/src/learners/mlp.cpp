#include "dml/learners/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dml/dataset.hpp"
#include "dml/rng.hpp"

namespace dml {

namespace detail {

namespace {

struct Unpacked {
  Eigen::Map<const Eigen::MatrixXd> w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::VectorXd> w2;
  double b2;
};

Unpacked unpack(const Eigen::VectorXd& theta, Eigen::Index p, int hidden) {
  const double* d = theta.data();
  return {Eigen::Map<const Eigen::MatrixXd>(d, p, hidden),
          Eigen::Map<const Eigen::VectorXd>(d + p * hidden, hidden),
          Eigen::Map<const Eigen::VectorXd>(d + p * hidden + hidden, hidden),
          d[p * hidden + 2 * hidden]};
}

}  // namespace

Eigen::VectorXd mlp_forward(const Eigen::VectorXd& theta, const Eigen::MatrixXd& Xs,
                            int hidden) {
  const Unpacked u = unpack(theta, Xs.cols(), hidden);
  Eigen::MatrixXd H = ((Xs * u.w1).rowwise() + u.b1.transpose());
  H = (1.0 / (1.0 + (-H.array()).exp())).matrix();
  return (H * u.w2).array() + u.b2;
}

double mlp_loss_grad(const Eigen::VectorXd& theta, const Eigen::MatrixXd& Xs,
                     const Eigen::VectorXd& y, int hidden, double decay,
                     Eigen::VectorXd* grad) {
  const Eigen::Index p = Xs.cols();
  const Unpacked u = unpack(theta, p, hidden);

  Eigen::MatrixXd H = ((Xs * u.w1).rowwise() + u.b1.transpose());
  H = (1.0 / (1.0 + (-H.array()).exp())).matrix();  // sigmoid
  const Eigen::VectorXd yhat = (H * u.w2).array() + u.b2;
  const Eigen::VectorXd err = yhat - y;

  double loss = err.squaredNorm() + decay * theta.squaredNorm();
  if (grad) {
    grad->resize(theta.size());
    double* g = grad->data();
    Eigen::Map<Eigen::MatrixXd> gw1(g, p, hidden);
    Eigen::Map<Eigen::VectorXd> gb1(g + p * hidden, hidden);
    Eigen::Map<Eigen::VectorXd> gw2(g + p * hidden + hidden, hidden);
    double& gb2 = g[p * hidden + 2 * hidden];

    const Eigen::VectorXd r2 = 2.0 * err;
    gw2 = H.transpose() * r2;
    gb2 = r2.sum();
    const Eigen::MatrixXd D =
        (r2 * u.w2.transpose()).array() * (H.array() * (1.0 - H.array()));
    gw1 = Xs.transpose() * D;
    gb1 = D.colwise().sum();
    *grad += 2.0 * decay * theta;
  }
  return loss;
}

}  // namespace detail

namespace {

struct TrainOut {
  Eigen::VectorXd theta;
  bool converged = false;
};

TrainOut train_mlp(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& y, int hidden,
                   double decay, int max_iter, double tol, Rng rng) {
  const Eigen::Index p = Xs.cols();
  const Eigen::Index dim = p * hidden + 2 * hidden + 1;
  Eigen::VectorXd theta(dim);
  for (Eigen::Index i = 0; i < dim; ++i) theta[i] = rng.uniform(-0.5, 0.5);

  Eigen::VectorXd grad;
  double loss = detail::mlp_loss_grad(theta, Xs, y, hidden, decay, &grad);
  const double g0 = std::max(1.0, grad.norm());
  double step = 1.0 / g0;

  TrainOut out;
  for (int it = 0; it < max_iter; ++it) {
    const double gnorm = grad.norm();
    if (gnorm <= tol * g0) {
      out.converged = true;
      break;
    }
    // Armijo backtracking, warm-started from twice the last accepted step.
    const double slope = gnorm * gnorm;
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd cand = theta - step * grad;
      const double cand_loss = detail::mlp_loss_grad(cand, Xs, y, hidden, decay, nullptr);
      if (cand_loss <= loss - 1e-4 * step * slope) {
        theta = cand;
        loss = cand_loss;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // flat to machine precision
    loss = detail::mlp_loss_grad(theta, Xs, y, hidden, decay, &grad);
  }
  out.theta = std::move(theta);
  return out;
}

class MlpModel : public FittedModel {
 public:
  MlpModel(Eigen::Index features, Standardizer stz, Eigen::VectorXd theta, int hidden,
           bool warn)
      : FittedModel(features), stz_(std::move(stz)), theta_(std::move(theta)), hidden_(hidden) {
    warning_ = warn;
  }

 private:
  Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override {
    return detail::mlp_forward(theta_, stz_.apply(X), hidden_);
  }

  Standardizer stz_;
  Eigen::VectorXd theta_;
  int hidden_;
};

}  // namespace

FitResult fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const LearnerSpec& spec) {
  const auto& prm = std::get<MlpParams>(spec.params);
  const Eigen::Index n = X.rows();
  if (n < prm.cv_folds)
    throw ConfigError("mlp: need at least cv_folds rows (" + std::to_string(prm.cv_folds) + ")");

  FitResult out;
  out.tuning.parameter = "decay";

  double chosen = prm.decay_grid.front();
  if (prm.decay_grid.size() > 1) {
    const SplitPlan plan = make_split(n, prm.cv_folds, mix_seed(spec.tuning_seed, 0x1417));
    Eigen::VectorXd cv_err = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prm.decay_grid.size()));
    for (int k = 0; k < prm.cv_folds; ++k) {
      const auto tr = plan.complement_rows(k);
      const auto te = plan.fold_rows(k);
      Eigen::MatrixXd Xtr(tr.size(), X.cols()), Xte(te.size(), X.cols());
      Eigen::VectorXd ytr(tr.size()), yte(te.size());
      for (std::size_t i = 0; i < tr.size(); ++i) {
        Xtr.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]);
        ytr[static_cast<Eigen::Index>(i)] = y[tr[i]];
      }
      for (std::size_t i = 0; i < te.size(); ++i) {
        Xte.row(static_cast<Eigen::Index>(i)) = X.row(te[i]);
        yte[static_cast<Eigen::Index>(i)] = y[te[i]];
      }
      const Standardizer stz = Standardizer::fit(Xtr);
      const Eigen::MatrixXd Xtr_s = stz.apply(Xtr);
      const Eigen::MatrixXd Xte_s = stz.apply(Xte);
      // Same initialization across decay candidates for a fair comparison.
      for (std::size_t di = 0; di < prm.decay_grid.size(); ++di) {
        const TrainOut t =
            train_mlp(Xtr_s, ytr, prm.hidden_units, prm.decay_grid[di], prm.max_iterations,
                      prm.gradient_tol, Rng(mix_seed(spec.tuning_seed, 0x2000 + k)));
        const Eigen::VectorXd pred = detail::mlp_forward(t.theta, Xte_s, prm.hidden_units);
        cv_err[static_cast<Eigen::Index>(di)] += (pred - yte).squaredNorm() / static_cast<double>(n);
      }
    }
    out.tuning.candidates = prm.decay_grid;
    out.tuning.errors.assign(cv_err.data(), cv_err.data() + cv_err.size());
    out.tuning.choose_min();
    chosen = out.tuning.chosen;
  } else {
    out.tuning.candidates = prm.decay_grid;
    out.tuning.errors = {0.0};
    out.tuning.chosen = chosen;
  }

  const Standardizer stz = Standardizer::fit(X);
  const Eigen::MatrixXd Xs = stz.apply(X);
  const TrainOut t = train_mlp(Xs, y, prm.hidden_units, chosen, prm.max_iterations,
                               prm.gradient_tol, Rng(mix_seed(spec.tuning_seed, 0x3000)));
  out.model = std::make_shared<MlpModel>(X.cols(), stz, t.theta, prm.hidden_units,
                                         !t.converged);
  return out;
}

}  // namespace dml
