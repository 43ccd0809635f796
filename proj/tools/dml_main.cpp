#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dml/application.hpp"
#include "dml/json_io.hpp"
#include "dml/metrics.hpp"
#include "dml/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string now_string() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
  return buf;
}

void write_manifest(const fs::path& out_dir, const json& manifest) {
  std::ofstream f(out_dir / "manifest.json");
  f << manifest.dump(2) << "\n";
}

struct SimulateOptions {
  std::string case_id = "baseline";
  long n = 0;
  int reps = 0;
  std::uint64_t seed = 42;
  int folds = 5;
  int splits = 9;  // S
  int workers = 0;
  std::vector<std::string> methods;
  std::string out_dir;
};

int cmd_simulate(const SimulateOptions& opt) {
  std::vector<dml::SimCell> cells =
      opt.case_id == "baseline" ? dml::baseline_suite() : dml::case_suite(std::stoi(opt.case_id));

  // --n filters when the case sweeps sample size, otherwise overrides.
  if (opt.n > 0) {
    bool sweeps_n = false;
    for (const auto& c : cells)
      if (c.dgp.n != cells.front().dgp.n) sweeps_n = true;
    if (sweeps_n) {
      std::erase_if(cells, [&](const dml::SimCell& c) { return c.dgp.n != opt.n; });
      if (cells.empty()) throw dml::ConfigError("no cells with n=" + std::to_string(opt.n));
    } else {
      for (auto& c : cells) c.dgp.n = opt.n;
    }
  }
  for (auto& c : cells) {
    if (opt.reps > 0) c.replications = opt.reps;
    for (auto& m : c.methods) {
      m.folds = opt.folds;
      if (m.kind == dml::MethodKind::Dml) m.repetitions = opt.splits;
    }
    if (!opt.methods.empty()) {
      std::erase_if(c.methods, [&](const dml::MethodSpec& m) {
        return std::find(opt.methods.begin(), opt.methods.end(), m.name) == opt.methods.end();
      });
    }
  }

  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);

  json manifest = {{"command", "simulate"},
                   {"case", opt.case_id},
                   {"seed", opt.seed},
                   {"folds", opt.folds},
                   {"splits", opt.splits},
                   {"version", kVersion},
                   {"out", opt.out_dir},
                   {"started", now_string()},
                   {"status", "running"}};
  json jcells = json::array();
  for (const auto& c : cells) jcells.push_back(dml::to_json(c));
  manifest["cells"] = jcells;
  write_manifest(out_dir, manifest);

  const int workers = opt.workers > 0 ? opt.workers : omp_get_max_threads();
  const dml::SimulationRun run = dml::run_cells(cells, opt.seed, workers);

  dml::write_results_jsonl((out_dir / "results.jsonl").string(), run);
  dml::write_summary_csv((out_dir / "summary.csv").string(), run.results);
  dml::write_boxplot_csv((out_dir / "boxplot.csv").string(), run.results);

  json cell_status = json::array();
  for (const auto& c : cells) {
    json st = {{"id", c.id}, {"status", "ok"}};
    cell_status.push_back(st);
  }
  json jfail = json::array();
  for (const auto& f : run.failures) {
    jfail.push_back({{"cell", f.cell}, {"method", f.method}, {"rep", f.replication},
                     {"error", f.message}});
    for (auto& st : cell_status)
      if (st["id"] == f.cell) st["status"] = "partial_failure";
  }
  manifest["cell_status"] = cell_status;
  manifest["failures"] = jfail;
  manifest["finished"] = now_string();
  manifest["status"] = run.failures.empty() ? "complete" : "failed";
  write_manifest(out_dir, manifest);

  for (const auto& f : run.failures)
    std::cerr << "FAILED " << f.cell << "/" << f.method << " rep " << f.replication << ": "
              << f.message << "\n";
  std::cout << "simulate: " << run.results.size() << " estimates, " << run.failures.size()
            << " failures -> " << opt.out_dir << "\n";
  return run.failures.empty() ? 0 : 1;
}

struct ApplyOptions {
  std::string data_path;
  std::string schema_path;
  std::string recipe = "raw";
  std::vector<std::string> methods;
  int folds = 5;
  int splits = 199;
  std::uint64_t seed = 42;
  double trim = 0.01;
  int workers = 0;
  std::string out_dir;
};

struct ApplyRow {
  std::string method, recipe;
  dml::EstimateRecord record;
  bool cross_fitted = false;
};

dml::EstimateRecord apply_method(const dml::Dataset& d, const std::string& method,
                                 const ApplyOptions& opt, std::uint64_t seed, bool* crossfit) {
  *crossfit = false;
  if (method == "ols") return dml::estimate_ols_adjusted(d);
  if (method == "simple_ols") return dml::estimate_simple_ols(d);
  if (method == "naive_boost")
    return dml::estimate_naive_ml(d, dml::LearnerSpec::gradient_boost(seed));

  dml::LearnerKind kind;
  if (method == "dml_ols") kind = dml::LearnerKind::Ols;
  else if (method == "dml_lasso") kind = dml::LearnerKind::Lasso;
  else if (method == "dml_spline") kind = dml::LearnerKind::SplineAdditive;
  else if (method == "dml_forest") kind = dml::LearnerKind::RandomForest;
  else if (method == "dml_boost") kind = dml::LearnerKind::GradientBoost;
  else if (method == "dml_mlp") kind = dml::LearnerKind::Mlp;
  else throw dml::ConfigError("unknown method '" + method + "'");

  *crossfit = true;
  dml::DmlConfig cfg;
  cfg.family = dml::EstimatorFamily::PlrDml1;
  cfg.folds = opt.folds;
  cfg.repetitions = opt.splits;
  cfg.trim_threshold = opt.trim;
  cfg.seed = seed;
  switch (kind) {
    case dml::LearnerKind::Ols: cfg.treatment_learner = dml::LearnerSpec::ols(); break;
    case dml::LearnerKind::Lasso: cfg.treatment_learner = dml::LearnerSpec::lasso(); break;
    case dml::LearnerKind::SplineAdditive:
      cfg.treatment_learner = dml::LearnerSpec::spline_additive();
      break;
    case dml::LearnerKind::RandomForest:
      cfg.treatment_learner = dml::LearnerSpec::random_forest();
      break;
    case dml::LearnerKind::GradientBoost:
      cfg.treatment_learner = dml::LearnerSpec::gradient_boost();
      break;
    case dml::LearnerKind::Mlp: cfg.treatment_learner = dml::LearnerSpec::mlp(); break;
  }
  cfg.outcome_learner = cfg.treatment_learner;

  const dml::AggregateEstimate agg = dml::repeat_median(d, cfg);
  dml::EstimateRecord rec;
  rec.theta = agg.median_theta;
  rec.std_error = agg.median_se;
  std::vector<double> mw, my;
  for (const auto& r : agg.records) {
    mw.push_back(r.mse_w);
    my.push_back(r.mse_y);
  }
  rec.mse_w = dml::median(std::move(mw));
  rec.mse_y = dml::median(std::move(my));
  rec.repetition_seed = seed;
  return rec;
}

int cmd_apply(const ApplyOptions& opt) {
  const dml::CsvSchema schema = opt.schema_path.empty()
                                    ? dml::CsvSchema::housing_default()
                                    : dml::CsvSchema::from_json_file(opt.schema_path);
  const dml::Dataset canonical = dml::ingest_csv(opt.data_path, schema);
  const double mean_nox = canonical.column("nox").values.mean();

  std::vector<std::string> method_specs = opt.methods;
  if (method_specs.empty()) {
    method_specs = {"ols:hr",       "simple_ols:raw", "naive_boost:raw", "ols:raw",
                    "ols:flex",     "dml_ols:flex",   "dml_ols:raw",     "dml_ols:hr",
                    "dml_spline:raw", "dml_mlp:raw",  "dml_lasso:flex",  "dml_boost:raw",
                    "dml_forest:raw"};
  }

  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);

  json manifest = {{"command", "apply"},      {"data", opt.data_path},
                   {"recipe_default", opt.recipe}, {"seed", opt.seed},
                   {"folds", opt.folds},      {"splits", opt.splits},
                   {"trim", opt.trim},        {"version", kVersion},
                   {"methods", method_specs}, {"started", now_string()},
                   {"status", "running"}};
  write_manifest(out_dir, manifest);

  std::map<std::string, dml::Dataset> recipe_cache;
  auto recipe_data = [&](const std::string& name) -> const dml::Dataset& {
    auto it = recipe_cache.find(name);
    if (it == recipe_cache.end()) {
      it = recipe_cache.emplace(name, apply_recipe(canonical, dml::SpecRecipe::by_name(name)))
               .first;
    }
    return it->second;
  };

  std::vector<ApplyRow> rows;
  std::vector<std::string> failures;
  for (const std::string& spec : method_specs) {
    std::string method = spec, recipe = opt.recipe;
    if (const auto pos = spec.find(':'); pos != std::string::npos) {
      method = spec.substr(0, pos);
      recipe = spec.substr(pos + 1);
    }
    try {
      ApplyRow row;
      row.method = method;
      row.recipe = recipe;
      const std::uint64_t seed = dml::mix_seed(opt.seed, dml::hash_name(method + ":" + recipe));
      row.record = apply_method(recipe_data(recipe), method, opt, seed, &row.cross_fitted);
      rows.push_back(std::move(row));
      std::cout << method << ":" << recipe << " -> theta=" << rows.back().record.theta
                << " se=" << rows.back().record.std_error << "\n";
    } catch (const std::exception& e) {
      failures.push_back(method + ":" + recipe + ": " + e.what());
      std::cerr << "FAILED " << method << ":" << recipe << ": " << e.what() << "\n";
    }
  }

  // Table-shaped CSV, DML rows sorted by descending first-stage MSE(Y).
  std::stable_sort(rows.begin(), rows.end(), [](const ApplyRow& a, const ApplyRow& b) {
    if (a.cross_fitted != b.cross_fitted) return !a.cross_fitted;
    if (!a.cross_fitted) return false;
    return a.record.mse_y > b.record.mse_y;
  });
  {
    std::ofstream t(out_dir / "table.csv");
    t << "method,recipe,estimate,se,effect_at_mean_pct,mse_y,mse_w\n";
    for (const ApplyRow& r : rows) {
      t << r.method << ',' << r.recipe << ',' << r.record.theta << ',' << r.record.std_error
        << ',' << dml::effect_at_mean(r.record.theta, mean_nox) << ',';
      if (r.cross_fitted)
        t << r.record.mse_y << ',' << r.record.mse_w;
      else
        t << ',';
      t << "\n";
    }
  }
  {
    std::ofstream f(out_dir / "results.jsonl");
    for (const ApplyRow& r : rows) {
      json j = dml::to_json(r.record);
      j["cell"] = "application";
      j["method"] = r.method + ":" + r.recipe;
      j["rep"] = 0;
      f << j.dump() << "\n";
    }
  }

  manifest["failures"] = failures;
  manifest["finished"] = now_string();
  manifest["status"] = failures.empty() ? "complete" : "failed";
  write_manifest(out_dir, manifest);
  return failures.empty() ? 0 : 1;
}

struct ReportOptions {
  std::vector<std::string> in_dirs;
  std::string out_dir;
};

int cmd_report(const ReportOptions& opt) {
  std::vector<dml::MethodResult> all;
  std::vector<std::string> malformed;
  for (const auto& dir : opt.in_dirs) {
    if (!fs::is_directory(dir)) throw dml::IngestError("not a directory: '" + dir + "'");
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".jsonl") continue;
      dml::JsonlReadResult r = dml::read_results_jsonl(entry.path().string());
      for (auto& m : r.results) all.push_back(std::move(m));
      for (auto& m : r.malformed) malformed.push_back(std::move(m));
    }
  }
  if (all.empty() && malformed.empty()) {
    std::cerr << "no results found\n";
    return 1;
  }
  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);
  std::stable_sort(all.begin(), all.end(), [](const dml::MethodResult& a, const dml::MethodResult& b) {
    if (a.cell != b.cell) return a.cell < b.cell;
    if (a.method != b.method) return a.method < b.method;
    return a.replication < b.replication;
  });
  dml::write_summary_csv((out_dir / "summary.csv").string(), all);
  dml::write_boxplot_csv((out_dir / "boxplot.csv").string(), all);
  for (const auto& m : malformed) std::cerr << "skipped malformed record: " << m << "\n";
  std::cout << "report: " << all.size() << " estimates aggregated -> " << opt.out_dir << "\n";
  return malformed.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double/debiased machine learning estimation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config");
  app.require_subcommand(1);

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a simulation scenario");
  simulate->add_option("--case", sim.case_id, "baseline or 1..11")->capture_default_str();
  simulate->add_option("--n", sim.n, "sample size override/filter");
  simulate->add_option("--reps", sim.reps, "replications per cell");
  simulate->add_option("--seed", sim.seed, "global seed")->capture_default_str();
  simulate->add_option("--folds", sim.folds, "cross-fitting folds K")->capture_default_str();
  simulate->add_option("--splits", sim.splits, "algorithm repetitions S")->capture_default_str();
  simulate->add_option("--workers", sim.workers, "worker threads (default: hardware)");
  simulate->add_option("--method", sim.methods, "restrict to these methods");
  simulate->add_option("--out", sim.out_dir, "output directory")->required();

  ApplyOptions app_opt;
  CLI::App* apply = app.add_subcommand("apply", "Estimate effects on a CSV dataset");
  apply->add_option("--data", app_opt.data_path, "CSV path")->required();
  apply->add_option("--schema", app_opt.schema_path, "schema config JSON");
  apply->add_option("--recipe", app_opt.recipe, "default recipe (hr/raw/flex)")
      ->capture_default_str();
  apply->add_option("--method", app_opt.methods, "method or method:recipe entries");
  apply->add_option("--folds", app_opt.folds, "folds K")->capture_default_str();
  apply->add_option("--splits", app_opt.splits, "repetitions S")->capture_default_str();
  apply->add_option("--seed", app_opt.seed, "seed")->capture_default_str();
  apply->add_option("--trim", app_opt.trim, "propensity trim threshold")->capture_default_str();
  apply->add_option("--workers", app_opt.workers, "worker threads");
  apply->add_option("--out", app_opt.out_dir, "output directory")->required();

  ReportOptions rep;
  CLI::App* report = app.add_subcommand("report", "Aggregate results.jsonl directories");
  report->add_option("--in", rep.in_dirs, "input directories")->required();
  report->add_option("--out", rep.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (apply->parsed()) return cmd_apply(app_opt);
    if (report->parsed()) return cmd_report(rep);
  } catch (const dml::IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
