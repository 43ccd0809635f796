#include "dml/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dml {

namespace {

constexpr std::array<double, 4> kBaselineStepLevels = {-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0};
constexpr std::array<double, 4> kTableStepLevels = {-3.0, -1.0, 1.0, 3.0};
constexpr double kUnobservedCoef = 0.5;
constexpr double kColliderCoef = 0.5;

double quantile_type7(const std::vector<double>& sorted, double prob) {
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

// Single-column transforms -------------------------------------------------

Eigen::VectorXd transform_column(const Eigen::VectorXd& x, const FormAssignment& fa,
                                 const Eigen::MatrixXd& all,
                                 const std::array<double, 4>& step_levels) {
  switch (fa.form) {
    case FunctionalForm::Linear:
      return x;
    case FunctionalForm::Ushaped:
      return x.array().square();
    case FunctionalForm::Interactions:
      return x.array() * all.col(fa.partner).array();
    case FunctionalForm::Step:
      return step_transform(x, step_levels);
    case FunctionalForm::Cubic:
      return 0.25 * x.array().cube();
    default:
      throw ConfigError("transform_column: unresolved functional form");
  }
}

std::vector<FormAssignment> assign_forms(FunctionalForm form, int p, Rng& rng) {
  std::vector<FormAssignment> out(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    FormAssignment& fa = out[static_cast<std::size_t>(j)];
    fa.form = form;
    if (form == FunctionalForm::RandomPerConfounder) {
      static constexpr std::array<FunctionalForm, 5> pool = {
          FunctionalForm::Linear, FunctionalForm::Ushaped, FunctionalForm::Interactions,
          FunctionalForm::Step, FunctionalForm::Cubic};
      fa.form = pool[rng.uniform_int(5)];
    }
    if (fa.form == FunctionalForm::Interactions) {
      if (p < 2) throw ConfigError("interactions form needs at least 2 columns");
      const int other = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(p - 1)));
      fa.partner = other >= j ? other + 1 : other;
    }
  }
  return out;
}

// The five-term structure of the reference scenario over a 4-column block:
// x1, x2^2, x1*x2, step(x3), x4^3.
Eigen::MatrixXd baseline_terms(const Eigen::MatrixXd& block) {
  Eigen::MatrixXd t(block.rows(), 5);
  t.col(0) = block.col(0);
  t.col(1) = block.col(1).array().square();
  t.col(2) = block.col(0).array() * block.col(1).array();
  t.col(3) = step_transform(block.col(2), kBaselineStepLevels);
  t.col(4) = block.col(3).array().cube();
  return t;
}

struct TermBlock {
  Eigen::MatrixXd terms;               // n x n_terms
  Eigen::VectorXd coef_w, coef_y;      // per-term coefficients
  std::vector<FormAssignment> forms;
};

// Terms + coefficients for one covariate block (confounders or extras).
// `start_index` continues the 1/j decay across blocks of the same role.
TermBlock build_block(const Eigen::MatrixXd& block, FunctionalForm form,
                      CoefficientLaw law, int multiplier_w, int multiplier_y,
                      Rng& rng_forms, Rng& rng_coef) {
  TermBlock out;
  if (form == FunctionalForm::BaselineMix) {
    out.terms = baseline_terms(block);
    out.coef_w = Eigen::VectorXd::Constant(5, 0.1);
    out.coef_y = Eigen::VectorXd::Constant(5, 0.1);
    out.forms.assign(static_cast<std::size_t>(block.cols()),
                     {FunctionalForm::BaselineMix, -1});
  } else {
    const int p = static_cast<int>(block.cols());
    out.forms = assign_forms(form, p, rng_forms);
    out.terms.resize(block.rows(), p);
    for (int j = 0; j < p; ++j)
      out.terms.col(j) = transform_column(block.col(j), out.forms[static_cast<std::size_t>(j)],
                                          block, kTableStepLevels);
    out.coef_w.resize(p);
    out.coef_y.resize(p);
    for (int j = 0; j < p; ++j) {
      if (law == CoefficientLaw::Fixed) {
        out.coef_w[j] = 0.1;
        out.coef_y[j] = 0.1;
      } else {
        const double sign = rng_coef.uniform() < 0.5 ? -1.0 : 1.0;
        const double mag_d = std::abs(rng_coef.normal());
        const double mag_g = std::abs(rng_coef.normal());
        out.coef_w[j] = sign * mag_d / static_cast<double>(j + 1);
        out.coef_y[j] = sign * mag_g / static_cast<double>(j + 1);
      }
    }
  }
  out.coef_w *= static_cast<double>(multiplier_w);
  out.coef_y *= static_cast<double>(multiplier_y);
  return out;
}

}  // namespace

const char* to_string(FunctionalForm f) {
  switch (f) {
    case FunctionalForm::Linear: return "linear";
    case FunctionalForm::Ushaped: return "ushaped";
    case FunctionalForm::Interactions: return "interactions";
    case FunctionalForm::Step: return "step";
    case FunctionalForm::Cubic: return "cubic";
    case FunctionalForm::RandomPerConfounder: return "random";
    case FunctionalForm::BaselineMix: return "baseline_mix";
  }
  return "?";
}

const char* to_string(CoefficientLaw law) {
  return law == CoefficientLaw::Fixed ? "fixed" : "std_normal_same_sign";
}

void DgpSpec::validate() const {
  if (p_conf < 1) throw ConfigError("dgp: p_conf must be >= 1");
  if (n < 4) throw ConfigError("dgp: n must be >= 4");
  if (conf_strength_multiplier < 1) throw ConfigError("dgp: multiplier must be >= 1");
  if (n_noise < 0 || n_outcome_only < 0 || n_treatment_only < 0)
    throw ConfigError("dgp: variable counts must be >= 0");
  if (colliders_instead && unobserved_confounder)
    throw ConfigError("dgp: colliders_instead cannot combine with unobserved_confounder");
  if (colliders_instead && (n_noise || n_outcome_only || n_treatment_only))
    throw ConfigError("dgp: colliders_instead admits no extra variable groups");
  if (functional_form == FunctionalForm::BaselineMix && !colliders_instead) {
    if (p_conf != 4) throw ConfigError("dgp: baseline mix requires exactly 4 confounders");
    if (n_outcome_only != 0 && n_outcome_only != 4)
      throw ConfigError("dgp: baseline mix outcome-only group must have 4 columns");
    if (n_treatment_only != 0 && n_treatment_only != 4)
      throw ConfigError("dgp: baseline mix treatment-only group must have 4 columns");
  }
  if (functional_form == FunctionalForm::Interactions && p_conf < 2)
    throw ConfigError("dgp: interactions form needs p_conf >= 2");
}

Eigen::VectorXd step_transform(const Eigen::VectorXd& x, const std::array<double, 4>& levels) {
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_type7(sorted, 0.25);
  const double q2 = quantile_type7(sorted, 0.50);
  const double q3 = quantile_type7(sorted, 0.75);
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < q1) out[i] = levels[0];
    else if (x[i] < q2) out[i] = levels[1];
    else if (x[i] < q3) out[i] = levels[2];
    else out[i] = levels[3];
  }
  return out;
}

Eigen::MatrixXd draw_covariates(Eigen::Index n, int d, Rng& rng) {
  if (d < 1) throw ConfigError("draw_covariates: need d >= 1");
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal(0.0, 0.5);
  Eigen::MatrixXd Z(n, d);
  for (Eigen::Index r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) Z(r, c) = rng.normal();
  return Z * A;
}

Eigen::MatrixXd apply_functional_form(const Eigen::MatrixXd& x, FunctionalForm form, Rng& rng) {
  if (form == FunctionalForm::BaselineMix)
    throw ConfigError("apply_functional_form: baseline mix is a block construction");
  const auto forms = assign_forms(form, static_cast<int>(x.cols()), rng);
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (int j = 0; j < static_cast<int>(x.cols()); ++j)
    out.col(j) = transform_column(x.col(j), forms[static_cast<std::size_t>(j)], x,
                                  kTableStepLevels);
  return out;
}

DgpDraw generate(const DgpSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.n;

  Rng root(spec.seed);
  Rng rng_cov = root.fork(1);
  Rng rng_forms = root.fork(2);
  Rng rng_coef = root.fork(3);
  Rng rng_noise = root.fork(4);
  Rng rng_extra = root.fork(5);

  const double alpha_w = rng_noise.normal();
  const double alpha_y = rng_noise.normal();
  Eigen::VectorXd eps_w(n), eps_y(n);
  for (Eigen::Index i = 0; i < n; ++i) eps_w[i] = rng_noise.normal();
  for (Eigen::Index i = 0; i < n; ++i) eps_y[i] = rng_noise.normal();

  std::vector<Column> cols;

  if (spec.colliders_instead) {
    // Unconfounded W and Y; covariates are caused by both, cycling through
    // the reference functional forms.
    const Eigen::VectorXd w = (alpha_w + eps_w.array()).matrix();
    const Eigen::VectorXd y = (alpha_y + spec.beta * w.array() + eps_y.array()).matrix();

    static constexpr std::array<FunctionalForm, 5> cycle = {
        FunctionalForm::Linear, FunctionalForm::Ushaped, FunctionalForm::Interactions,
        FunctionalForm::Step, FunctionalForm::Cubic};

    std::vector<Column> ccols;
    std::vector<FormAssignment> forms;
    for (int j = 0; j < spec.p_conf; ++j) {
      const FunctionalForm f = cycle[static_cast<std::size_t>(j) % 5];
      forms.push_back({f, -1});
      Eigen::VectorXd base(n);
      switch (f) {
        case FunctionalForm::Linear: base = w + y; break;
        case FunctionalForm::Ushaped: base = w.array().square() + y.array().square(); break;
        case FunctionalForm::Interactions: base = w.array() * y.array(); break;
        case FunctionalForm::Step:
          base = step_transform(w, kBaselineStepLevels) + step_transform(y, kBaselineStepLevels);
          break;
        case FunctionalForm::Cubic:
          base = 0.25 * (w.array().cube() + y.array().cube());
          break;
        default: break;
      }
      Eigen::VectorXd nu(n);
      for (Eigen::Index i = 0; i < n; ++i) nu[i] = rng_cov.normal();
      ccols.push_back({"xcoll" + std::to_string(j + 1),
                       (kColliderCoef * base.array() + nu.array()).matrix(),
                       ColumnRole::Covariate});
    }
    ccols.push_back({"w", w, ColumnRole::Treatment});
    ccols.push_back({"y", y, ColumnRole::Outcome});

    DgpDraw draw{Dataset(std::move(ccols)), spec.beta};
    draw.forms = std::move(forms);
    draw.alpha_w = alpha_w;
    draw.alpha_y = alpha_y;
    draw.eps_w = std::move(eps_w);
    draw.eps_y = std::move(eps_y);
    return draw;
  }

  const int d = spec.total_covariates();
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng_cov.normal(0.0, 0.5);
  Eigen::MatrixXd Z(n, d);
  for (Eigen::Index r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) Z(r, c) = rng_cov.normal();
  const Eigen::MatrixXd X = Z * A;

  const auto conf = X.leftCols(spec.p_conf);
  const TermBlock conf_block =
      build_block(conf, spec.functional_form, spec.coefficient_law, 1,
                  spec.conf_strength_multiplier, rng_forms, rng_coef);

  Eigen::VectorXd w_signal = conf_block.terms * conf_block.coef_w;
  Eigen::VectorXd y_signal = conf_block.terms * conf_block.coef_y;
  std::vector<FormAssignment> all_forms = conf_block.forms;

  int offset = spec.p_conf + spec.n_noise;
  if (spec.n_outcome_only > 0) {
    const TermBlock xp = build_block(X.middleCols(offset, spec.n_outcome_only),
                                     spec.functional_form, spec.coefficient_law, 1, 1,
                                     rng_forms, rng_coef);
    y_signal += xp.terms * xp.coef_y;
    all_forms.insert(all_forms.end(), xp.forms.begin(), xp.forms.end());
  }
  offset += spec.n_outcome_only;
  if (spec.n_treatment_only > 0) {
    const TermBlock xz = build_block(X.middleCols(offset, spec.n_treatment_only),
                                     spec.functional_form, spec.coefficient_law, 1, 1,
                                     rng_forms, rng_coef);
    w_signal += xz.terms * xz.coef_w;
    all_forms.insert(all_forms.end(), xz.forms.begin(), xz.forms.end());
  }

  Eigen::VectorXd u;
  if (spec.unobserved_confounder) {
    u.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = rng_extra.normal();
    w_signal += kUnobservedCoef * u;
    y_signal += kUnobservedCoef * u;
  }

  const Eigen::VectorXd w = (alpha_w + w_signal.array() + eps_w.array()).matrix();
  const Eigen::VectorXd y =
      (alpha_y + spec.beta * w.array() + y_signal.array() + eps_y.array()).matrix();

  for (int j = 0; j < spec.p_conf; ++j)
    cols.push_back({"xc" + std::to_string(j + 1), X.col(j), ColumnRole::Covariate});
  for (int j = 0; j < spec.n_noise; ++j)
    cols.push_back({"e" + std::to_string(j + 1), X.col(spec.p_conf + j), ColumnRole::Covariate});
  for (int j = 0; j < spec.n_outcome_only; ++j)
    cols.push_back({"xp" + std::to_string(j + 1),
                    X.col(spec.p_conf + spec.n_noise + j), ColumnRole::Covariate});
  for (int j = 0; j < spec.n_treatment_only; ++j)
    cols.push_back({"xz" + std::to_string(j + 1),
                    X.col(spec.p_conf + spec.n_noise + spec.n_outcome_only + j),
                    ColumnRole::Covariate});
  cols.push_back({"w", w, ColumnRole::Treatment});
  cols.push_back({"y", y, ColumnRole::Outcome});

  DgpDraw draw{Dataset(std::move(cols)), spec.beta};
  draw.gamma = conf_block.coef_y;
  draw.delta = conf_block.coef_w;
  draw.cov_factor = A;
  draw.forms = std::move(all_forms);
  draw.alpha_w = alpha_w;
  draw.alpha_y = alpha_y;
  draw.eps_w = std::move(eps_w);
  draw.eps_y = std::move(eps_y);
  draw.u = std::move(u);
  return draw;
}

std::vector<MethodSpec> default_method_grid(bool include_dml_ols) {
  std::vector<MethodSpec> m;
  m.push_back({"simple_ols", MethodKind::SimpleOls});
  m.push_back({"ols_adjusted", MethodKind::OlsAdjusted});
  m.push_back({"naive_boost", MethodKind::NaiveMl, LearnerKind::GradientBoost});
  if (include_dml_ols) m.push_back({"dml_ols", MethodKind::Dml, LearnerKind::Ols});
  m.push_back({"dml_lasso", MethodKind::Dml, LearnerKind::Lasso});
  m.push_back({"dml_spline", MethodKind::Dml, LearnerKind::SplineAdditive});
  m.push_back({"dml_forest", MethodKind::Dml, LearnerKind::RandomForest});
  m.push_back({"dml_boost", MethodKind::Dml, LearnerKind::GradientBoost});
  m.push_back({"dml_mlp", MethodKind::Dml, LearnerKind::Mlp});
  return m;
}

namespace {

DgpSpec random_form_spec(Eigen::Index n, int p_conf) {
  DgpSpec s;
  s.n = n;
  s.p_conf = p_conf;
  s.coefficient_law = CoefficientLaw::StdNormalSameSign;
  s.functional_form = FunctionalForm::RandomPerConfounder;
  return s;
}

std::vector<MethodSpec> drop_spline(std::vector<MethodSpec> m) {
  m.erase(std::remove_if(m.begin(), m.end(),
                         [](const MethodSpec& s) {
                           return s.kind == MethodKind::Dml &&
                                  s.learner == LearnerKind::SplineAdditive;
                         }),
          m.end());
  return m;
}

}  // namespace

std::vector<SimCell> baseline_suite() {
  SimCell cell;
  cell.id = "baseline";
  cell.dgp = DgpSpec{};  // n=1000, 4 confounders, fixed 0.1 coefficients
  cell.methods = default_method_grid(true);
  return {cell};
}

std::vector<SimCell> case_suite(int case_id) {
  std::vector<SimCell> cells;
  const auto methods = default_method_grid(false);

  switch (case_id) {
    case 1: {
      static constexpr std::array<FunctionalForm, 6> forms = {
          FunctionalForm::Linear,      FunctionalForm::Ushaped,
          FunctionalForm::Interactions, FunctionalForm::Step,
          FunctionalForm::Cubic,       FunctionalForm::RandomPerConfounder};
      for (FunctionalForm f : forms) {
        SimCell c;
        c.dgp = random_form_spec(1000, 5);
        c.dgp.functional_form = f;
        c.id = std::string("case1/") + to_string(f);
        c.methods = methods;
        cells.push_back(std::move(c));
      }
      break;
    }
    case 2: {
      for (int mult : {1, 2, 3, 5, 10}) {
        SimCell c;
        c.dgp = random_form_spec(1000, 5);
        c.dgp.conf_strength_multiplier = mult;
        c.id = "case2/mult" + std::to_string(mult);
        c.methods = methods;
        cells.push_back(std::move(c));
      }
      break;
    }
    case 3: {
      for (int p : {2, 5, 10, 20, 50}) {
        SimCell c;
        c.dgp = random_form_spec(1000, p);
        c.id = "case3/p" + std::to_string(p);
        c.methods = methods;
        cells.push_back(std::move(c));
      }
      break;
    }
    case 4: {
      for (FunctionalForm f : {FunctionalForm::RandomPerConfounder, FunctionalForm::Linear}) {
        for (Eigen::Index n : {20, 50, 100, 500, 1000, 5000, 10000}) {
          SimCell c;
          c.dgp = random_form_spec(n, 5);
          c.dgp.functional_form = f;
          c.id = std::string("case4/") + to_string(f) + "/n" + std::to_string(n);
          c.methods = n < 50 ? drop_spline(methods) : methods;
          cells.push_back(std::move(c));
        }
      }
      break;
    }
    case 5: {
      for (int noise : {0, 5, 10, 20, 50}) {
        SimCell c;
        c.dgp = random_form_spec(1000, 5);
        c.dgp.n_noise = noise;
        c.id = "case5/noise" + std::to_string(noise);
        c.methods = methods;
        cells.push_back(std::move(c));
      }
      break;
    }
    case 6: {
      for (bool include : {true, false}) {
        SimCell c;
        c.dgp = DgpSpec{};
        c.dgp.n_outcome_only = 4;
        c.id = include ? "case6/with_xp" : "case6/without_xp";
        if (!include) c.exclude_prefixes = {"xp"};
        c.methods = methods;
        cells.push_back(std::move(c));
      }
      break;
    }
    case 7: {
      for (bool include : {true, false}) {
        SimCell c;
        c.dgp = DgpSpec{};
        c.dgp.n_treatment_only = 4;
        c.id = include ? "case7/with_xz" : "case7/without_xz";
        if (!include) c.exclude_prefixes = {"xz"};
        c.methods = methods;
        cells.push_back(std::move(c));
      }
      break;
    }
    case 8: {
      for (bool unobs : {false, true}) {
        SimCell c;
        c.dgp = DgpSpec{};
        c.dgp.unobserved_confounder = unobs;
        c.id = unobs ? "case8/unobserved" : "case8/observed";
        c.methods = methods;
        cells.push_back(std::move(c));
      }
      break;
    }
    case 9: {
      {
        SimCell c;
        c.dgp = DgpSpec{};
        c.id = "case9/confounders";
        c.methods = methods;
        cells.push_back(std::move(c));
      }
      {
        SimCell c;
        c.dgp = DgpSpec{};
        c.dgp.p_conf = 5;
        c.dgp.colliders_instead = true;
        c.id = "case9/colliders";
        c.methods = methods;
        cells.push_back(std::move(c));
      }
      break;
    }
    case 10: {
      for (Eigen::Index n : {20, 100, 500, 1000}) {
        for (int k : {2, 5, 10}) {
          if (n < 2 * k) continue;
          SimCell c;
          c.dgp = random_form_spec(n, 5);
          c.id = "case10/n" + std::to_string(n) + "/k" + std::to_string(k);
          c.methods = n <= 20 ? drop_spline(methods) : methods;
          for (MethodSpec& m : c.methods) m.folds = k;
          cells.push_back(std::move(c));
        }
      }
      break;
    }
    case 11: {
      for (Eigen::Index n : {20, 100, 500, 1000}) {
        for (int s : {1, 5, 9, 19}) {
          SimCell c;
          c.dgp = random_form_spec(n, 5);
          c.id = "case11/n" + std::to_string(n) + "/s" + std::to_string(s);
          c.methods = n <= 20 ? drop_spline(methods) : methods;
          for (MethodSpec& m : c.methods) m.repetitions = s;
          cells.push_back(std::move(c));
        }
      }
      break;
    }
    default:
      throw ConfigError("case_suite: unknown case id " + std::to_string(case_id));
  }
  return cells;
}

}  // namespace dml
