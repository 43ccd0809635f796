#include "dml/json_io.hpp"

namespace dml {

using nlohmann::json;

json to_json(const LearnerSpec& spec) {
  json params = json::object();
  switch (spec.kind()) {
    case LearnerKind::Ols:
      break;
    case LearnerKind::Lasso: {
      const auto& p = std::get<LassoParams>(spec.params);
      params = {{"cv_folds", p.cv_folds},
                {"path_length", p.path_length},
                {"lambda_min_ratio", p.lambda_min_ratio}};
      if (p.fixed_lambda) params["fixed_lambda"] = *p.fixed_lambda;
      break;
    }
    case LearnerKind::SplineAdditive: {
      const auto& p = std::get<SplineParams>(spec.params);
      params = {{"basis_per_feature", p.basis_per_feature},
                {"gcv_grid_size", p.gcv_grid_size},
                {"lambda_min", p.lambda_min},
                {"lambda_max", p.lambda_max}};
      break;
    }
    case LearnerKind::RandomForest: {
      const auto& p = std::get<ForestParams>(spec.params);
      params = {{"n_trees", p.n_trees}, {"min_leaf", p.min_leaf}};
      if (!p.mtry_candidates.empty()) params["mtry_candidates"] = p.mtry_candidates;
      break;
    }
    case LearnerKind::GradientBoost: {
      const auto& p = std::get<BoostParams>(spec.params);
      params = {{"learning_rate", p.learning_rate},
                {"max_depth", p.max_depth},
                {"max_rounds", p.max_rounds},
                {"patience", p.patience},
                {"cv_folds", p.cv_folds}};
      break;
    }
    case LearnerKind::Mlp: {
      const auto& p = std::get<MlpParams>(spec.params);
      params = {{"hidden_units", p.hidden_units},
                {"max_iterations", p.max_iterations},
                {"gradient_tol", p.gradient_tol},
                {"decay_grid", p.decay_grid},
                {"cv_folds", p.cv_folds}};
      break;
    }
  }
  return {{"kind", to_string(spec.kind())}, {"params", params}, {"tuning_seed", spec.tuning_seed}};
}

LearnerSpec learner_spec_from_json(const json& j) {
  LearnerSpec spec;
  const LearnerKind kind = learner_kind_from_string(j.at("kind").get<std::string>());
  const json params = j.value("params", json::object());
  switch (kind) {
    case LearnerKind::Ols:
      spec.params = OlsParams{};
      break;
    case LearnerKind::Lasso: {
      LassoParams p;
      p.cv_folds = params.value("cv_folds", p.cv_folds);
      p.path_length = params.value("path_length", p.path_length);
      p.lambda_min_ratio = params.value("lambda_min_ratio", p.lambda_min_ratio);
      if (params.contains("fixed_lambda")) p.fixed_lambda = params.at("fixed_lambda").get<double>();
      spec.params = p;
      break;
    }
    case LearnerKind::SplineAdditive: {
      SplineParams p;
      p.basis_per_feature = params.value("basis_per_feature", p.basis_per_feature);
      p.gcv_grid_size = params.value("gcv_grid_size", p.gcv_grid_size);
      p.lambda_min = params.value("lambda_min", p.lambda_min);
      p.lambda_max = params.value("lambda_max", p.lambda_max);
      spec.params = p;
      break;
    }
    case LearnerKind::RandomForest: {
      ForestParams p;
      p.n_trees = params.value("n_trees", p.n_trees);
      p.min_leaf = params.value("min_leaf", p.min_leaf);
      p.mtry_candidates = params.value("mtry_candidates", p.mtry_candidates);
      spec.params = p;
      break;
    }
    case LearnerKind::GradientBoost: {
      BoostParams p;
      p.learning_rate = params.value("learning_rate", p.learning_rate);
      p.max_depth = params.value("max_depth", p.max_depth);
      p.max_rounds = params.value("max_rounds", p.max_rounds);
      p.patience = params.value("patience", p.patience);
      p.cv_folds = params.value("cv_folds", p.cv_folds);
      spec.params = p;
      break;
    }
    case LearnerKind::Mlp: {
      MlpParams p;
      p.hidden_units = params.value("hidden_units", p.hidden_units);
      p.max_iterations = params.value("max_iterations", p.max_iterations);
      p.gradient_tol = params.value("gradient_tol", p.gradient_tol);
      p.decay_grid = params.value("decay_grid", p.decay_grid);
      p.cv_folds = params.value("cv_folds", p.cv_folds);
      spec.params = p;
      break;
    }
  }
  spec.tuning_seed = j.value("tuning_seed", std::uint64_t{0});
  spec.validate();
  return spec;
}

json to_json(const DmlConfig& cfg) {
  json j = {{"family", to_string(cfg.family)},
            {"k", cfg.folds},
            {"s", cfg.repetitions},
            {"treatment_learner", to_json(cfg.treatment_learner)},
            {"outcome_learner", to_json(cfg.outcome_learner)},
            {"trim_threshold", cfg.trim_threshold},
            {"seed", cfg.seed}};
  if (cfg.instrument_learner) j["instrument_learner"] = to_json(*cfg.instrument_learner);
  return j;
}

DmlConfig dml_config_from_json(const json& j) {
  DmlConfig cfg;
  cfg.family = family_from_string(j.value("family", "plr_dml1"));
  cfg.folds = j.value("k", cfg.folds);
  cfg.repetitions = j.value("s", cfg.repetitions);
  if (j.contains("treatment_learner"))
    cfg.treatment_learner = learner_spec_from_json(j.at("treatment_learner"));
  if (j.contains("outcome_learner"))
    cfg.outcome_learner = learner_spec_from_json(j.at("outcome_learner"));
  if (j.contains("instrument_learner"))
    cfg.instrument_learner = learner_spec_from_json(j.at("instrument_learner"));
  cfg.trim_threshold = j.value("trim_threshold", cfg.trim_threshold);
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.validate();
  return cfg;
}

namespace {

FunctionalForm form_from_string(const std::string& s) {
  for (FunctionalForm f : {FunctionalForm::Linear, FunctionalForm::Ushaped,
                           FunctionalForm::Interactions, FunctionalForm::Step,
                           FunctionalForm::Cubic, FunctionalForm::RandomPerConfounder,
                           FunctionalForm::BaselineMix})
    if (s == to_string(f)) return f;
  throw ConfigError("unknown functional form '" + s + "'");
}

}  // namespace

json to_json(const DgpSpec& spec) {
  return {{"n", spec.n},
          {"p_conf", spec.p_conf},
          {"beta", spec.beta},
          {"coefficient_law", to_string(spec.coefficient_law)},
          {"conf_strength_multiplier", spec.conf_strength_multiplier},
          {"functional_form", to_string(spec.functional_form)},
          {"n_noise", spec.n_noise},
          {"n_outcome_only", spec.n_outcome_only},
          {"n_treatment_only", spec.n_treatment_only},
          {"unobserved_confounder", spec.unobserved_confounder},
          {"colliders_instead", spec.colliders_instead},
          {"seed", spec.seed}};
}

DgpSpec dgp_spec_from_json(const json& j) {
  DgpSpec s;
  s.n = j.value("n", s.n);
  s.p_conf = j.value("p_conf", s.p_conf);
  s.beta = j.value("beta", s.beta);
  if (j.contains("coefficient_law"))
    s.coefficient_law = j.at("coefficient_law").get<std::string>() == "fixed"
                            ? CoefficientLaw::Fixed
                            : CoefficientLaw::StdNormalSameSign;
  if (j.contains("functional_form"))
    s.functional_form = form_from_string(j.at("functional_form").get<std::string>());
  s.conf_strength_multiplier = j.value("conf_strength_multiplier", s.conf_strength_multiplier);
  s.n_noise = j.value("n_noise", s.n_noise);
  s.n_outcome_only = j.value("n_outcome_only", s.n_outcome_only);
  s.n_treatment_only = j.value("n_treatment_only", s.n_treatment_only);
  s.unobserved_confounder = j.value("unobserved_confounder", s.unobserved_confounder);
  s.colliders_instead = j.value("colliders_instead", s.colliders_instead);
  s.seed = j.value("seed", std::uint64_t{0});
  s.validate();
  return s;
}

json to_json(const EstimateRecord& r) {
  json j = {{"theta", r.theta},
            {"se", r.std_error},
            {"per_fold", r.per_fold_thetas},
            {"mse_w", r.mse_w},
            {"mse_y", r.mse_y},
            {"n_trimmed", r.n_trimmed},
            {"seed", r.repetition_seed}};
  j["mse_z"] = r.mse_z ? json(*r.mse_z) : json(nullptr);
  return j;
}

EstimateRecord estimate_record_from_json(const json& j) {
  EstimateRecord r;
  r.theta = j.at("theta").get<double>();
  r.std_error = j.at("se").get<double>();
  r.per_fold_thetas = j.value("per_fold", std::vector<double>{});
  r.mse_w = j.value("mse_w", 0.0);
  r.mse_y = j.value("mse_y", 0.0);
  if (j.contains("mse_z") && !j.at("mse_z").is_null()) r.mse_z = j.at("mse_z").get<double>();
  r.n_trimmed = j.value("n_trimmed", 0);
  r.repetition_seed = j.value("seed", std::uint64_t{0});
  return r;
}

json to_json(const SimCell& cell) {
  json methods = json::array();
  for (const MethodSpec& m : cell.methods) {
    json jm = {{"name", m.name}, {"folds", m.folds}, {"repetitions", m.repetitions}};
    switch (m.kind) {
      case MethodKind::SimpleOls: jm["kind"] = "simple_ols"; break;
      case MethodKind::OlsAdjusted: jm["kind"] = "ols_adjusted"; break;
      case MethodKind::NaiveMl: jm["kind"] = "naive_ml"; break;
      case MethodKind::Dml: jm["kind"] = "dml"; break;
    }
    if (m.kind == MethodKind::NaiveMl || m.kind == MethodKind::Dml)
      jm["learner"] = to_string(m.learner);
    if (m.kind == MethodKind::Dml) jm["family"] = to_string(m.family);
    methods.push_back(std::move(jm));
  }
  return {{"id", cell.id},
          {"dgp", to_json(cell.dgp)},
          {"replications", cell.replications},
          {"exclude_prefixes", cell.exclude_prefixes},
          {"methods", methods}};
}

}  // namespace dml
