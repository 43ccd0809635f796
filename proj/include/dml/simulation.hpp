#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dml/dataset.hpp"
#include "dml/engine.hpp"
#include "dml/rng.hpp"

namespace dml {

enum class CoefficientLaw { Fixed, StdNormalSameSign };

enum class FunctionalForm {
  Linear,
  Ushaped,
  Interactions,
  Step,
  Cubic,
  RandomPerConfounder,
  BaselineMix
};

const char* to_string(FunctionalForm f);
const char* to_string(CoefficientLaw law);

// Full description of a simulated data-generating process.
struct DgpSpec {
  Eigen::Index n = 1000;
  int p_conf = 4;
  double beta = 1.0;
  CoefficientLaw coefficient_law = CoefficientLaw::Fixed;  // Fixed: 0.1 per term
  int conf_strength_multiplier = 1;                        // scales outcome coefficients
  FunctionalForm functional_form = FunctionalForm::BaselineMix;
  int n_noise = 0;
  int n_outcome_only = 0;
  int n_treatment_only = 0;
  bool unobserved_confounder = false;
  bool colliders_instead = false;
  std::uint64_t seed = 0;

  void validate() const;
  int total_covariates() const { return p_conf + n_noise + n_outcome_only + n_treatment_only; }
};

struct FormAssignment {
  FunctionalForm form = FunctionalForm::Linear;
  int partner = -1;  // interacting column (Interactions only)
};

struct DgpDraw {
  Dataset dataset;
  double true_beta = 1.0;
  Eigen::VectorXd gamma;  // outcome-side coefficients (confounder terms)
  Eigen::VectorXd delta;  // treatment-side coefficients
  Eigen::MatrixXd cov_factor;  // A with Sigma = A'A
  std::vector<FormAssignment> forms;  // per confounder (and extras, appended)
  double alpha_w = 0.0, alpha_y = 0.0;
  Eigen::VectorXd eps_w, eps_y;
  Eigen::VectorXd u;  // unobserved confounder draw (empty when unused)
};

/// n x d sample from N(0, A'A) with A entries iid N(0, 0.5^2).
Eigen::MatrixXd draw_covariates(Eigen::Index n, int d, Rng& rng);

/// Per-column transform of the named functional form (Table-style variants:
/// step maps quartiles to {-3,-1,1,3}, cubic scales by 0.25).
Eigen::MatrixXd apply_functional_form(const Eigen::MatrixXd& x, FunctionalForm form, Rng& rng);

/// Quartile step function: maps each value to levels[q] by sample quartile
/// (type-7 interpolation), monotone in the input.
Eigen::VectorXd step_transform(const Eigen::VectorXd& x, const std::array<double, 4>& levels);

DgpDraw generate(const DgpSpec& spec);

// --- simulation study manifest -------------------------------------------

enum class MethodKind { SimpleOls, OlsAdjusted, NaiveMl, Dml };

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::Dml;
  LearnerKind learner = LearnerKind::Ols;  // NaiveMl / Dml only
  EstimatorFamily family = EstimatorFamily::PlrDml1;
  int folds = 5;
  int repetitions = 9;
};

struct SimCell {
  std::string id;
  DgpSpec dgp;
  std::vector<MethodSpec> methods;
  std::vector<std::string> exclude_prefixes;  // covariate columns hidden from estimators
  int replications = 100;
};

/// The named scenario grids; case ids 1..11 plus the baseline.
std::vector<SimCell> case_suite(int case_id);
std::vector<SimCell> baseline_suite();

/// The benchmark + DML method set used across scenarios. `include_dml_ols`
/// adds the OLS-inside-DML variant (baseline only).
std::vector<MethodSpec> default_method_grid(bool include_dml_ols);

}  // namespace dml
