#include "dml/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dml/learners/ols.hpp"
#include "dml/rng.hpp"

namespace dml {

namespace {

constexpr std::uint64_t kSplitStream = 0x51;
constexpr std::uint64_t kTreatmentStream = 0x71;
constexpr std::uint64_t kOutcomeStream = 0x72;
constexpr std::uint64_t kInstrumentStream = 0x73;
constexpr std::uint64_t kArmStream = 0x74;

constexpr double kDegenerateVar = 1e-12;
constexpr double kPropensityClipLo = 0.01;
constexpr double kPropensityClipHi = 0.99;

double centered_variance(const Eigen::VectorXd& v) {
  if (v.size() == 0) return 0.0;
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size());
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

struct CrossFit {
  Eigen::VectorXd resid;  // value - held-out prediction, full length
  double mse = 0.0;       // pooled over folds
};

CrossFit cross_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& target,
                   const LearnerSpec& spec, const SplitPlan& plan, std::uint64_t rep_seed,
                   std::uint64_t stream) {
  CrossFit out;
  out.resid.resize(target.size());
  for (int k = 0; k < plan.k; ++k) {
    const auto train = plan.complement_rows(k);
    const auto test = plan.fold_rows(k);
    const LearnerSpec fold_spec =
        spec.with_seed(mix_seed(mix_seed(rep_seed, stream), static_cast<std::uint64_t>(k)));
    const FitResult fr = fit(take_rows(X, train), take(target, train), fold_spec);
    const Eigen::VectorXd pred = fr.model->predict(take_rows(X, test));
    for (std::size_t i = 0; i < test.size(); ++i)
      out.resid[test[i]] = target[test[i]] - pred[static_cast<Eigen::Index>(i)];
  }
  out.mse = out.resid.squaredNorm() / static_cast<double>(target.size());
  return out;
}

// Heteroskedasticity-robust standard error of the no-intercept residual
// regression: sqrt(sum vw^2 e^2) / sum vw^2 with e = vy - theta*vw.
double sandwich_se(const Eigen::VectorXd& vw, const Eigen::VectorXd& vy, double theta) {
  const Eigen::VectorXd eps = vy - theta * vw;
  const double denom = vw.squaredNorm();
  const double meat = (vw.array().square() * eps.array().square()).sum();
  return std::sqrt(meat) / denom;
}

void require_plr_inputs(const Dataset& d, const DmlConfig& cfg) {
  if (d.covariate_count() == 0)
    throw ConfigError("plr: dataset needs at least one covariate column");
  if (d.n_rows() < 2 * static_cast<Eigen::Index>(cfg.folds))
    throw ConfigError("plr: need n >= 2K rows (n=" + std::to_string(d.n_rows()) +
                      ", K=" + std::to_string(cfg.folds) + ")");
}

struct PlrParts {
  CrossFit w, y;
};

PlrParts plr_cross_fit(const Dataset& d, const DmlConfig& cfg) {
  const Eigen::MatrixXd X = design_matrix(d, {ColumnRole::Covariate});
  const SplitPlan plan = make_split(d.n_rows(), cfg.folds, mix_seed(cfg.seed, kSplitStream));
  PlrParts parts;
  parts.w = cross_fit(X, d.treatment(), cfg.treatment_learner, plan, cfg.seed, kTreatmentStream);
  parts.y = cross_fit(X, d.outcome(), cfg.outcome_learner, plan, cfg.seed, kOutcomeStream);
  return parts;
}

}  // namespace

const char* to_string(EstimatorFamily family) {
  switch (family) {
    case EstimatorFamily::PlrDml1: return "plr_dml1";
    case EstimatorFamily::PlrDml2: return "plr_dml2";
    case EstimatorFamily::Aipw: return "aipw";
    case EstimatorFamily::Pliv: return "pliv";
  }
  return "?";
}

EstimatorFamily family_from_string(const std::string& s) {
  if (s == "plr_dml1") return EstimatorFamily::PlrDml1;
  if (s == "plr_dml2") return EstimatorFamily::PlrDml2;
  if (s == "aipw") return EstimatorFamily::Aipw;
  if (s == "pliv") return EstimatorFamily::Pliv;
  throw ConfigError("unknown estimator family '" + s + "'");
}

void DmlConfig::validate() const {
  if (folds < 2) throw ConfigError("dml: K must be >= 2");
  if (repetitions < 1) throw ConfigError("dml: S must be >= 1");
  if (trim_threshold < 0.0 || trim_threshold >= 0.5)
    throw ConfigError("dml: trim threshold must lie in [0, 0.5)");
  if (family == EstimatorFamily::Pliv && !instrument_learner)
    throw ConfigError("dml: PLIV requires an instrument learner");
  treatment_learner.validate();
  outcome_learner.validate();
  if (instrument_learner) instrument_learner->validate();
}

EstimateRecord estimate_plr_dml1(const Dataset& d, const DmlConfig& cfg) {
  cfg.validate();
  require_plr_inputs(d, cfg);
  const SplitPlan plan = make_split(d.n_rows(), cfg.folds, mix_seed(cfg.seed, kSplitStream));
  const PlrParts parts = plr_cross_fit(d, cfg);

  EstimateRecord rec;
  rec.repetition_seed = cfg.seed;
  rec.mse_w = parts.w.mse;
  rec.mse_y = parts.y.mse;

  for (int k = 0; k < cfg.folds; ++k) {
    const auto rows = plan.fold_rows(k);
    const Eigen::VectorXd vw = take(parts.w.resid, rows);
    const Eigen::VectorXd vy = take(parts.y.resid, rows);
    if (centered_variance(vw) < kDegenerateVar)
      throw NumericError("plr: degenerate treatment residual variance in fold " +
                         std::to_string(k));
    rec.per_fold_thetas.push_back(vw.dot(vy) / vw.squaredNorm());
  }
  rec.theta = 0.0;
  for (double t : rec.per_fold_thetas) rec.theta += t;
  rec.theta /= static_cast<double>(cfg.folds);
  rec.std_error = sandwich_se(parts.w.resid, parts.y.resid, rec.theta);
  return rec;
}

EstimateRecord estimate_plr_dml2(const Dataset& d, const DmlConfig& cfg) {
  cfg.validate();
  require_plr_inputs(d, cfg);
  const PlrParts parts = plr_cross_fit(d, cfg);

  if (centered_variance(parts.w.resid) < kDegenerateVar)
    throw NumericError("plr: degenerate pooled treatment residual variance");

  EstimateRecord rec;
  rec.repetition_seed = cfg.seed;
  rec.mse_w = parts.w.mse;
  rec.mse_y = parts.y.mse;
  rec.theta = parts.w.resid.dot(parts.y.resid) / parts.w.resid.squaredNorm();
  rec.std_error = sandwich_se(parts.w.resid, parts.y.resid, rec.theta);
  return rec;
}

EstimateRecord estimate_aipw(const Dataset& d, const DmlConfig& cfg) {
  cfg.validate();
  const Eigen::VectorXd& w = d.treatment();
  const Eigen::VectorXd& y = d.outcome();
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] != 0.0 && w[i] != 1.0)
      throw ConfigError("aipw: treatment must be binary 0/1 (row " + std::to_string(i) + ")");
  if (d.covariate_count() == 0) throw ConfigError("aipw: needs covariates");
  if (d.n_rows() < 2 * static_cast<Eigen::Index>(cfg.folds))
    throw ConfigError("aipw: need n >= 2K rows");

  const Eigen::MatrixXd X = design_matrix(d, {ColumnRole::Covariate});
  const SplitPlan plan = make_split(d.n_rows(), cfg.folds, mix_seed(cfg.seed, kSplitStream));
  const Eigen::Index n = d.n_rows();

  Eigen::VectorXd mu1(n), mu0(n), ehat(n);
  for (int k = 0; k < plan.k; ++k) {
    const auto train = plan.complement_rows(k);
    const auto test = plan.fold_rows(k);
    std::vector<Eigen::Index> treated, control;
    for (Eigen::Index r : train) (w[r] == 1.0 ? treated : control).push_back(r);
    if (treated.empty() || control.empty())
      throw NumericError("aipw: empty treatment arm in training split for fold " +
                         std::to_string(k));

    const std::uint64_t fold_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(k));
    const FitResult f1 = fit(take_rows(X, treated), take(y, treated),
                             cfg.outcome_learner.with_seed(mix_seed(fold_seed, kArmStream)));
    const FitResult f0 = fit(take_rows(X, control), take(y, control),
                             cfg.outcome_learner.with_seed(mix_seed(fold_seed, kArmStream + 1)));
    const FitResult fe = fit(take_rows(X, train), take(w, train),
                             cfg.treatment_learner.with_seed(mix_seed(fold_seed, kTreatmentStream)));

    const Eigen::MatrixXd Xte = take_rows(X, test);
    const Eigen::VectorXd p1 = f1.model->predict(Xte);
    const Eigen::VectorXd p0 = f0.model->predict(Xte);
    const Eigen::VectorXd pe = fe.model->predict(Xte);
    for (std::size_t i = 0; i < test.size(); ++i) {
      mu1[test[i]] = p1[static_cast<Eigen::Index>(i)];
      mu0[test[i]] = p0[static_cast<Eigen::Index>(i)];
      ehat[test[i]] = std::clamp(pe[static_cast<Eigen::Index>(i)], kPropensityClipLo,
                                 kPropensityClipHi);
    }
  }

  EstimateRecord rec;
  rec.repetition_seed = cfg.seed;

  std::vector<double> psi;
  psi.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ehat[i] < cfg.trim_threshold || ehat[i] > 1.0 - cfg.trim_threshold) {
      ++rec.n_trimmed;
      continue;
    }
    const double term = mu1[i] - mu0[i] + w[i] * (y[i] - mu1[i]) / ehat[i] -
                        (1.0 - w[i]) * (y[i] - mu0[i]) / (1.0 - ehat[i]);
    psi.push_back(term);
  }
  if (psi.empty()) throw NumericError("aipw: every row was trimmed (threshold " +
                                      std::to_string(cfg.trim_threshold) + ")");

  const double m = static_cast<double>(psi.size());
  double mean = 0.0;
  for (double v : psi) mean += v;
  mean /= m;
  double var = 0.0;
  for (double v : psi) var += (v - mean) * (v - mean);
  var = m > 1 ? var / (m - 1.0) : 0.0;

  rec.theta = mean;
  rec.std_error = std::sqrt(var / m);
  rec.mse_w = (ehat - w).squaredNorm() / static_cast<double>(n);
  double mse_y = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pred = w[i] == 1.0 ? mu1[i] : mu0[i];
    mse_y += (pred - y[i]) * (pred - y[i]);
  }
  rec.mse_y = mse_y / static_cast<double>(n);
  return rec;
}

EstimateRecord estimate_pliv(const Dataset& d, const DmlConfig& cfg) {
  cfg.validate();
  if (!d.has_instrument()) throw ConfigError("pliv: dataset has no instrument column");
  require_plr_inputs(d, cfg);

  const Eigen::MatrixXd X = design_matrix(d, {ColumnRole::Covariate});
  const SplitPlan plan = make_split(d.n_rows(), cfg.folds, mix_seed(cfg.seed, kSplitStream));
  const CrossFit cw =
      cross_fit(X, d.treatment(), cfg.treatment_learner, plan, cfg.seed, kTreatmentStream);
  const CrossFit cy =
      cross_fit(X, d.outcome(), cfg.outcome_learner, plan, cfg.seed, kOutcomeStream);
  const CrossFit cz =
      cross_fit(X, d.instrument(), *cfg.instrument_learner, plan, cfg.seed, kInstrumentStream);

  const double n = static_cast<double>(d.n_rows());
  const double zw = cz.resid.dot(cw.resid);
  if (std::abs(zw) / n < 1e-8)
    throw NumericError("pliv: weak instrument (|sum vz*vw|/n = " +
                       std::to_string(std::abs(zw) / n) + ")");

  EstimateRecord rec;
  rec.repetition_seed = cfg.seed;
  rec.theta = cz.resid.dot(cy.resid) / zw;
  const Eigen::VectorXd eps = cy.resid - rec.theta * cw.resid;
  rec.std_error =
      std::sqrt((cz.resid.array().square() * eps.array().square()).sum()) / std::abs(zw);
  rec.mse_w = cw.mse;
  rec.mse_y = cy.mse;
  rec.mse_z = cz.mse;
  return rec;
}

EstimateRecord estimate(const Dataset& d, const DmlConfig& cfg) {
  switch (cfg.family) {
    case EstimatorFamily::PlrDml1: return estimate_plr_dml1(d, cfg);
    case EstimatorFamily::PlrDml2: return estimate_plr_dml2(d, cfg);
    case EstimatorFamily::Aipw: return estimate_aipw(d, cfg);
    case EstimatorFamily::Pliv: return estimate_pliv(d, cfg);
  }
  throw ConfigError("estimate: unknown family");
}

AggregateEstimate repeat_median(const Dataset& d, const DmlConfig& cfg) {
  cfg.validate();
  AggregateEstimate agg;
  agg.records.resize(static_cast<std::size_t>(cfg.repetitions));
  std::vector<std::string> failures(static_cast<std::size_t>(cfg.repetitions));
  std::vector<char> failed(static_cast<std::size_t>(cfg.repetitions), 0);

#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < cfg.repetitions; ++s) {
    DmlConfig rep_cfg = cfg;
    rep_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(s));
    try {
      agg.records[static_cast<std::size_t>(s)] = estimate(d, rep_cfg);
    } catch (const std::exception& e) {
      failed[static_cast<std::size_t>(s)] = 1;
      failures[static_cast<std::size_t>(s)] = e.what();
    }
  }
  for (int s = 0; s < cfg.repetitions; ++s) {
    if (failed[static_cast<std::size_t>(s)])
      throw NumericError("repetition " + std::to_string(s) + ": " +
                         failures[static_cast<std::size_t>(s)]);
  }

  std::vector<double> thetas, ses;
  for (const EstimateRecord& r : agg.records) {
    thetas.push_back(r.theta);
    ses.push_back(r.std_error);
  }
  agg.median_theta = median(std::move(thetas));
  agg.median_se = median(std::move(ses));
  return agg;
}

EstimateRecord estimate_simple_ols(const Dataset& d) {
  Eigen::MatrixXd X(d.n_rows(), 2);
  X.col(0).setOnes();
  X.col(1) = d.treatment();
  const OlsSolution sol = ols_solve(X, d.outcome(), true);
  EstimateRecord rec;
  rec.theta = sol.coef[1];
  rec.std_error = sol.se[1];
  return rec;
}

EstimateRecord estimate_ols_adjusted(const Dataset& d) {
  if (d.covariate_count() == 0)
    throw ConfigError("ols_adjusted: dataset needs at least one covariate");
  const Eigen::MatrixXd C = design_matrix(d, {ColumnRole::Covariate});
  Eigen::MatrixXd X(d.n_rows(), C.cols() + 2);
  X.col(0).setOnes();
  X.col(1) = d.treatment();
  X.rightCols(C.cols()) = C;
  const OlsSolution sol = ols_solve(X, d.outcome(), true);
  EstimateRecord rec;
  rec.theta = sol.coef[1];
  rec.std_error = sol.se[1];
  return rec;
}

EstimateRecord estimate_naive_ml(const Dataset& d, const LearnerSpec& outcome_learner) {
  if (d.covariate_count() == 0) throw ConfigError("naive_ml: dataset needs covariates");
  const Eigen::VectorXd& w = d.treatment();
  const Eigen::VectorXd& y = d.outcome();
  const Eigen::MatrixXd C = design_matrix(d, {ColumnRole::Covariate});

  Eigen::MatrixXd Xw(d.n_rows(), 2);
  Xw.col(0).setOnes();
  Xw.col(1) = w;
  const double beta0 = ols_solve(Xw, y, false).coef[1];

  const FitResult g = fit(C, y - beta0 * w, outcome_learner);
  const Eigen::VectorXd resid = y - g.model->predict(C);
  const OlsSolution final_fit = ols_solve(Xw, resid, true);

  EstimateRecord rec;
  rec.theta = final_fit.coef[1];
  rec.std_error = final_fit.se[1];
  return rec;
}

FirstStageReport first_stage_report(const EstimateRecord& r) {
  return {r.mse_w, r.mse_y, r.mse_z};
}

double median(std::vector<double> values) {
  if (values.empty()) throw ConfigError("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace detail {

EstimateRecord estimate_plr_nosplit(const Dataset& d, const DmlConfig& cfg) {
  cfg.validate();
  if (d.covariate_count() == 0) throw ConfigError("plr: dataset needs covariates");
  const Eigen::MatrixXd X = design_matrix(d, {ColumnRole::Covariate});

  const FitResult fw = fit(X, d.treatment(), cfg.treatment_learner);
  const FitResult fy = fit(X, d.outcome(), cfg.outcome_learner);
  const Eigen::VectorXd vw = d.treatment() - fw.model->predict(X);
  const Eigen::VectorXd vy = d.outcome() - fy.model->predict(X);

  if (centered_variance(vw) < 1e-12)
    throw NumericError("plr: degenerate treatment residual variance");

  EstimateRecord rec;
  rec.repetition_seed = cfg.seed;
  rec.theta = vw.dot(vy) / vw.squaredNorm();
  rec.std_error = sandwich_se(vw, vy, rec.theta);
  rec.mse_w = vw.squaredNorm() / static_cast<double>(d.n_rows());
  rec.mse_y = vy.squaredNorm() / static_cast<double>(d.n_rows());
  return rec;
}

}  // namespace detail

}  // namespace dml
