#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dml/dataset.hpp"
#include "dml/learners.hpp"

namespace dml {

enum class EstimatorFamily { PlrDml1, PlrDml2, Aipw, Pliv };

const char* to_string(EstimatorFamily family);
EstimatorFamily family_from_string(const std::string& s);

struct DmlConfig {
  EstimatorFamily family = EstimatorFamily::PlrDml1;
  int folds = 5;        // K
  int repetitions = 1;  // S
  LearnerSpec treatment_learner;
  LearnerSpec outcome_learner;
  std::optional<LearnerSpec> instrument_learner;
  double trim_threshold = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EstimateRecord {
  double theta = 0.0;
  double std_error = 0.0;
  std::vector<double> per_fold_thetas;  // PlrDml1 only
  double mse_w = 0.0;
  double mse_y = 0.0;
  std::optional<double> mse_z;
  int n_trimmed = 0;
  std::uint64_t repetition_seed = 0;
};

struct AggregateEstimate {
  double median_theta = 0.0;
  double median_se = 0.0;
  std::vector<EstimateRecord> records;
};

struct FirstStageReport {
  double mse_w = 0.0;
  double mse_y = 0.0;
  std::optional<double> mse_z;
};

// Cross-fitted estimators (Dataset roles select the involved columns).
EstimateRecord estimate_plr_dml1(const Dataset& d, const DmlConfig& cfg);
EstimateRecord estimate_plr_dml2(const Dataset& d, const DmlConfig& cfg);
EstimateRecord estimate_aipw(const Dataset& d, const DmlConfig& cfg);
EstimateRecord estimate_pliv(const Dataset& d, const DmlConfig& cfg);

/// Dispatch on cfg.family.
EstimateRecord estimate(const Dataset& d, const DmlConfig& cfg);

/// Runs the configured estimator S times with seeds derived from cfg.seed
/// and reports the medians of estimates and standard errors.
AggregateEstimate repeat_median(const Dataset& d, const DmlConfig& cfg);

// Benchmark estimators.
EstimateRecord estimate_simple_ols(const Dataset& d);
EstimateRecord estimate_ols_adjusted(const Dataset& d);
EstimateRecord estimate_naive_ml(const Dataset& d, const LearnerSpec& outcome_learner);

FirstStageReport first_stage_report(const EstimateRecord& r);

/// Exact median; the mean of the two middle values when the size is even.
double median(std::vector<double> values);

namespace detail {

// Test hook: PLR estimate without sample splitting (full-sample fit and
// in-sample prediction). Not reachable from the public estimator surface.
EstimateRecord estimate_plr_nosplit(const Dataset& d, const DmlConfig& cfg);

}  // namespace detail

}  // namespace dml
