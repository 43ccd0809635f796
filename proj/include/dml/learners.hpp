#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dml/errors.hpp"

namespace dml {

enum class LearnerKind { Ols, Lasso, SplineAdditive, RandomForest, GradientBoost, Mlp };

const char* to_string(LearnerKind kind);
LearnerKind learner_kind_from_string(const std::string& s);

struct OlsParams {};

struct LassoParams {
  int cv_folds = 10;
  int path_length = 100;          // log-spaced lambdas from lambda_max down
  double lambda_min_ratio = 1e-4;
  std::optional<double> fixed_lambda;  // bypass CV when set
};

struct SplineParams {
  int basis_per_feature = 8;   // cubic B-splines
  int gcv_grid_size = 20;      // log-spaced ridge penalties
  double lambda_min = 1e-5;
  double lambda_max = 1e5;
};

struct ForestParams {
  int n_trees = 200;
  int min_leaf = 5;
  std::vector<int> mtry_candidates;  // empty: {p/3, sqrt(p), p/2, p} dedup, min 1
};

struct BoostParams {
  double learning_rate = 0.3;
  int max_depth = 6;
  int max_rounds = 200;
  int patience = 10;  // early-stopping rounds without CV improvement
  int cv_folds = 5;
};

struct MlpParams {
  int hidden_units = 4;
  int max_iterations = 500;
  double gradient_tol = 1e-6;  // relative to the initial gradient norm
  std::vector<double> decay_grid = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0};
  int cv_folds = 5;
};

// Declarative learner configuration with a deterministic tuning stream.
struct LearnerSpec {
  using Params =
      std::variant<OlsParams, LassoParams, SplineParams, ForestParams, BoostParams, MlpParams>;

  Params params = OlsParams{};
  std::uint64_t tuning_seed = 0;

  LearnerKind kind() const;
  void validate() const;  // throws ConfigError on out-of-range hyperparameters

  static LearnerSpec ols(std::uint64_t seed = 0);
  static LearnerSpec lasso(std::uint64_t seed = 0);
  static LearnerSpec spline_additive(std::uint64_t seed = 0);
  static LearnerSpec random_forest(std::uint64_t seed = 0);
  static LearnerSpec gradient_boost(std::uint64_t seed = 0);
  static LearnerSpec mlp(std::uint64_t seed = 0);

  LearnerSpec with_seed(std::uint64_t seed) const {
    LearnerSpec s = *this;
    s.tuning_seed = seed;
    return s;
  }
};

// Hyperparameter search trace. `chosen` always attains the minimum recorded
// error; ties resolve to the smallest candidate value.
struct TuningReport {
  std::string parameter;
  std::vector<double> candidates;
  std::vector<double> errors;
  double chosen = 0.0;

  void choose_min();
};

// Opaque fitted predictor. predict() enforces the feature-count contract and
// is deterministic given the fitted state.
class FittedModel {
 public:
  virtual ~FittedModel() = default;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  Eigen::Index feature_count() const { return feature_count_; }
  bool convergence_warning() const { return warning_; }

 protected:
  explicit FittedModel(Eigen::Index feature_count) : feature_count_(feature_count) {}
  virtual Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const = 0;
  Eigen::Index feature_count_;
  bool warning_ = false;
};

using ModelPtr = std::shared_ptr<const FittedModel>;

struct FitResult {
  ModelPtr model;
  TuningReport tuning;
};

/// Fit any learner through the uniform contract.
FitResult fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LearnerSpec& spec);

/// Free-function form of the predict contract.
Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& X);

// Column-wise standardization with training statistics. Zero-variance
// columns get unit scale and are reported so callers can drop or warn.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<Eigen::Index> zero_variance;

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

}  // namespace dml
