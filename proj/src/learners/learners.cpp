#include "dml/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dml/learners/boost.hpp"
#include "dml/learners/forest.hpp"
#include "dml/learners/lasso.hpp"
#include "dml/learners/mlp.hpp"
#include "dml/learners/ols.hpp"
#include "dml/learners/spline.hpp"

namespace dml {

const char* to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Ols: return "ols";
    case LearnerKind::Lasso: return "lasso";
    case LearnerKind::SplineAdditive: return "spline_additive";
    case LearnerKind::RandomForest: return "random_forest";
    case LearnerKind::GradientBoost: return "gradient_boost";
    case LearnerKind::Mlp: return "mlp";
  }
  return "?";
}

LearnerKind learner_kind_from_string(const std::string& s) {
  if (s == "ols") return LearnerKind::Ols;
  if (s == "lasso") return LearnerKind::Lasso;
  if (s == "spline_additive") return LearnerKind::SplineAdditive;
  if (s == "random_forest") return LearnerKind::RandomForest;
  if (s == "gradient_boost") return LearnerKind::GradientBoost;
  if (s == "mlp") return LearnerKind::Mlp;
  throw ConfigError("unknown learner kind '" + s + "'");
}

LearnerKind LearnerSpec::kind() const {
  return static_cast<LearnerKind>(params.index());
}

void LearnerSpec::validate() const {
  if (const auto* p = std::get_if<LassoParams>(&params)) {
    if (p->cv_folds < 2) throw ConfigError("lasso: cv_folds must be >= 2");
    if (p->path_length < 1) throw ConfigError("lasso: path_length must be >= 1");
    if (p->lambda_min_ratio <= 0.0 || p->lambda_min_ratio > 1.0)
      throw ConfigError("lasso: lambda_min_ratio must lie in (0, 1]");
    if (p->fixed_lambda && *p->fixed_lambda < 0.0)
      throw ConfigError("lasso: fixed_lambda must be >= 0");
  } else if (const auto* p = std::get_if<SplineParams>(&params)) {
    if (p->basis_per_feature < 4) throw ConfigError("spline: basis_per_feature must be >= 4");
    if (p->gcv_grid_size < 1) throw ConfigError("spline: gcv_grid_size must be >= 1");
    if (p->lambda_min <= 0.0 || p->lambda_max < p->lambda_min)
      throw ConfigError("spline: invalid GCV lambda range");
  } else if (const auto* p = std::get_if<ForestParams>(&params)) {
    if (p->n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    if (p->min_leaf < 1) throw ConfigError("forest: min_leaf must be >= 1");
    for (int m : p->mtry_candidates)
      if (m < 1) throw ConfigError("forest: mtry candidates must be >= 1");
  } else if (const auto* p = std::get_if<BoostParams>(&params)) {
    if (p->learning_rate <= 0.0 || p->learning_rate > 1.0)
      throw ConfigError("boost: learning_rate must lie in (0, 1]");
    if (p->max_depth < 1) throw ConfigError("boost: max_depth must be >= 1");
    if (p->max_rounds < 1) throw ConfigError("boost: max_rounds must be >= 1");
    if (p->patience < 1) throw ConfigError("boost: patience must be >= 1");
    if (p->cv_folds < 2) throw ConfigError("boost: cv_folds must be >= 2");
  } else if (const auto* p = std::get_if<MlpParams>(&params)) {
    if (p->hidden_units < 1) throw ConfigError("mlp: hidden_units must be >= 1");
    if (p->max_iterations < 1) throw ConfigError("mlp: max_iterations must be >= 1");
    if (p->gradient_tol <= 0.0) throw ConfigError("mlp: gradient_tol must be > 0");
    if (p->decay_grid.empty()) throw ConfigError("mlp: decay_grid must be non-empty");
    for (double d : p->decay_grid)
      if (d < 0.0) throw ConfigError("mlp: decay values must be >= 0");
    if (p->cv_folds < 2) throw ConfigError("mlp: cv_folds must be >= 2");
  }
}

LearnerSpec LearnerSpec::ols(std::uint64_t seed) { return {OlsParams{}, seed}; }
LearnerSpec LearnerSpec::lasso(std::uint64_t seed) { return {LassoParams{}, seed}; }
LearnerSpec LearnerSpec::spline_additive(std::uint64_t seed) { return {SplineParams{}, seed}; }
LearnerSpec LearnerSpec::random_forest(std::uint64_t seed) { return {ForestParams{}, seed}; }
LearnerSpec LearnerSpec::gradient_boost(std::uint64_t seed) { return {BoostParams{}, seed}; }
LearnerSpec LearnerSpec::mlp(std::uint64_t seed) { return {MlpParams{}, seed}; }

void TuningReport::choose_min() {
  if (candidates.empty()) throw ConfigError("tuning: no candidates recorded");
  if (candidates.size() != errors.size())
    throw ConfigError("tuning: candidate/error size mismatch");
  double best_err = errors[0];
  for (double e : errors) best_err = std::min(best_err, e);
  double best_cand = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (errors[i] == best_err) best_cand = std::min(best_cand, candidates[i]);
  chosen = best_cand;
}

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != feature_count_) {
    throw ConfigError("predict: expected " + std::to_string(feature_count_) +
                      " features, got " + std::to_string(X.cols()));
  }
  if (X.rows() == 0) return Eigen::VectorXd(0);
  return predict_impl(X);
}

Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& X) {
  return model.predict(X);
}

FitResult fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LearnerSpec& spec) {
  if (X.rows() != y.size()) throw ConfigError("fit: rows(X) != len(y)");
  spec.validate();
  switch (spec.kind()) {
    case LearnerKind::Ols: return fit_ols(X, y, spec);
    case LearnerKind::Lasso: return fit_lasso(X, y, spec);
    case LearnerKind::SplineAdditive: return fit_spline_additive(X, y, spec);
    case LearnerKind::RandomForest: return fit_random_forest(X, y, spec);
    case LearnerKind::GradientBoost: return fit_gradient_boost(X, y, spec);
    case LearnerKind::Mlp: return fit_mlp(X, y, spec);
  }
  throw ConfigError("fit: unknown learner kind");
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer s;
  s.mean = X.colwise().mean();
  s.scale.resize(X.cols());
  const double n = static_cast<double>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - s.mean[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd < 1e-12) {
      s.scale[j] = 1.0;
      s.zero_variance.push_back(j);
    } else {
      s.scale[j] = sd;
    }
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

}  // namespace dml
