#include "dml/learners/boost.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <vector>

#include "dml/dataset.hpp"
#include "dml/learners/tree.hpp"
#include "dml/rng.hpp"

namespace dml {

namespace {

class BoostModel : public FittedModel {
 public:
  BoostModel(Eigen::Index features, double base, double rate, std::vector<RegressionTree> trees)
      : FittedModel(features), base_(base), rate_(rate), trees_(std::move(trees)) {}

 private:
  Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), base_);
    for (const RegressionTree& t : trees_) out += rate_ * t.predict(X);
    return out;
  }
  double base_;
  double rate_;
  std::vector<RegressionTree> trees_;
};

// Boosting state over a training matrix it owns: base score plus staged trees.
struct BoostStage {
  BoostStage(Eigen::MatrixXd X, Eigen::VectorXd y, const TreeOptions& opt, double rate)
      : X_train(std::move(X)), presort(X_train), y_train(std::move(y)), opt(opt), rate(rate) {
    base = y_train.mean();
    fitted = Eigen::VectorXd::Constant(y_train.size(), base);
    weight.assign(static_cast<std::size_t>(y_train.size()), 1);
  }

  // Adds one round; returns the new tree.
  const RegressionTree& step(Rng& rng) {
    const Eigen::VectorXd resid = y_train - fitted;
    trees.push_back(grow_tree(presort, resid, weight, opt, rng));
    fitted += rate * trees.back().predict(X_train);
    return trees.back();
  }

  Eigen::MatrixXd X_train;
  FeaturePresort presort;  // references X_train
  Eigen::VectorXd y_train;
  TreeOptions opt;
  double rate;
  double base = 0.0;
  Eigen::VectorXd fitted;
  std::vector<int> weight;
  std::vector<RegressionTree> trees;
};

}  // namespace

FitResult fit_gradient_boost(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const LearnerSpec& spec) {
  const auto& prm = std::get<BoostParams>(spec.params);
  const Eigen::Index n = X.rows();
  if (n < prm.cv_folds)
    throw ConfigError("boost: need at least cv_folds rows (" +
                      std::to_string(prm.cv_folds) + ")");

  TreeOptions opt;
  opt.max_depth = prm.max_depth;
  opt.min_leaf = 1;
  opt.mtry = -1;

  // Lockstep cross-validation: every fold advances one round at a time and
  // the mean held-out MSE curve drives early stopping.
  const SplitPlan plan = make_split(n, prm.cv_folds, mix_seed(spec.tuning_seed, 0xB057));
  std::vector<std::unique_ptr<BoostStage>> stages;
  std::vector<Eigen::MatrixXd> X_val;
  std::vector<Eigen::VectorXd> y_val, val_fit;
  std::vector<Rng> fold_rng;
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
    X_val.push_back(std::move(Xte));
    y_val.push_back(std::move(yte));
    val_fit.push_back(Eigen::VectorXd::Constant(y_val.back().size(), ytr.mean()));
    stages.push_back(std::make_unique<BoostStage>(std::move(Xtr), std::move(ytr), opt,
                                                  prm.learning_rate));
    fold_rng.push_back(Rng(mix_seed(spec.tuning_seed, 0xF01D + static_cast<std::uint64_t>(k))));
  }

  FitResult out;
  out.tuning.parameter = "rounds";

  double best_err = std::numeric_limits<double>::infinity();
  int best_round = 1;
  int stall = 0;
  for (int round = 1; round <= prm.max_rounds; ++round) {
    double err = 0.0;
    for (int k = 0; k < prm.cv_folds; ++k) {
      const RegressionTree& tree = stages[static_cast<std::size_t>(k)]->step(
          fold_rng[static_cast<std::size_t>(k)]);
      val_fit[static_cast<std::size_t>(k)] +=
          prm.learning_rate * tree.predict(X_val[static_cast<std::size_t>(k)]);
      err += (val_fit[static_cast<std::size_t>(k)] - y_val[static_cast<std::size_t>(k)])
                 .squaredNorm();
    }
    err /= static_cast<double>(n);
    out.tuning.candidates.push_back(static_cast<double>(round));
    out.tuning.errors.push_back(err);
    if (err < best_err) {
      best_err = err;
      best_round = round;
      stall = 0;
    } else if (++stall >= prm.patience) {
      break;
    }
  }
  out.tuning.choose_min();
  best_round = static_cast<int>(out.tuning.chosen);
  (void)best_err;

  // Final refit on all rows at the selected round count.
  BoostStage final_stage(X, y, opt, prm.learning_rate);
  Rng rng(mix_seed(spec.tuning_seed, 0xF1A1));
  for (int round = 0; round < best_round; ++round) final_stage.step(rng);

  out.model = std::make_shared<BoostModel>(X.cols(), final_stage.base, prm.learning_rate,
                                           std::move(final_stage.trees));
  return out;
}

}  // namespace dml
