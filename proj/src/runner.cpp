#include "dml/runner.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <map>

#include "dml/json_io.hpp"
#include "dml/metrics.hpp"
#include "dml/rng.hpp"

namespace dml {

std::uint64_t hash_name(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

LearnerSpec make_learner(LearnerKind kind, std::uint64_t seed) {
  switch (kind) {
    case LearnerKind::Ols: return LearnerSpec::ols(seed);
    case LearnerKind::Lasso: return LearnerSpec::lasso(seed);
    case LearnerKind::SplineAdditive: return LearnerSpec::spline_additive(seed);
    case LearnerKind::RandomForest: return LearnerSpec::random_forest(seed);
    case LearnerKind::GradientBoost: return LearnerSpec::gradient_boost(seed);
    case LearnerKind::Mlp: return LearnerSpec::mlp(seed);
  }
  throw ConfigError("make_learner: unknown kind");
}

Dataset drop_prefixed_covariates(const Dataset& d, const std::vector<std::string>& prefixes) {
  if (prefixes.empty()) return d;
  std::vector<Column> cols;
  for (const Column& c : d.columns()) {
    bool drop = false;
    if (c.role == ColumnRole::Covariate) {
      for (const auto& p : prefixes)
        if (c.name.rfind(p, 0) == 0) drop = true;
    }
    if (!drop) cols.push_back(c);
  }
  return Dataset(std::move(cols));
}

// Median-aggregated record of an S-repetition run.
EstimateRecord aggregate_to_record(const AggregateEstimate& agg) {
  EstimateRecord rec;
  rec.theta = agg.median_theta;
  rec.std_error = agg.median_se;
  std::vector<double> mw, my;
  bool any_z = true;
  std::vector<double> mz;
  for (const EstimateRecord& r : agg.records) {
    mw.push_back(r.mse_w);
    my.push_back(r.mse_y);
    if (r.mse_z) mz.push_back(*r.mse_z); else any_z = false;
  }
  rec.mse_w = median(std::move(mw));
  rec.mse_y = median(std::move(my));
  if (any_z && !mz.empty()) rec.mse_z = median(std::move(mz));
  rec.repetition_seed = agg.records.front().repetition_seed;
  for (const EstimateRecord& r : agg.records) rec.n_trimmed += r.n_trimmed;
  return rec;
}

EstimateRecord run_method(const Dataset& d, const MethodSpec& m, std::uint64_t seed) {
  switch (m.kind) {
    case MethodKind::SimpleOls:
      return estimate_simple_ols(d);
    case MethodKind::OlsAdjusted:
      return estimate_ols_adjusted(d);
    case MethodKind::NaiveMl:
      return estimate_naive_ml(d, make_learner(m.learner, seed));
    case MethodKind::Dml: {
      DmlConfig cfg;
      cfg.family = m.family;
      cfg.folds = m.folds;
      cfg.repetitions = m.repetitions;
      cfg.treatment_learner = make_learner(m.learner, 0);
      cfg.outcome_learner = make_learner(m.learner, 0);
      cfg.seed = seed;
      const AggregateEstimate agg = repeat_median(d, cfg);
      return aggregate_to_record(agg);
    }
  }
  throw ConfigError("run_method: unknown kind");
}

struct Task {
  std::size_t cell = 0;
  int replication = 0;
};

struct TaskOutput {
  std::vector<MethodResult> results;
  std::vector<RunFailure> failures;
};

TaskOutput run_task(const SimCell& cell, int rep, std::uint64_t global_seed) {
  TaskOutput out;
  const std::uint64_t cell_seed = mix_seed(global_seed, hash_name(cell.id));
  const std::uint64_t draw_seed = mix_seed(cell_seed, static_cast<std::uint64_t>(rep));

  DgpSpec spec = cell.dgp;
  spec.seed = draw_seed;
  DgpDraw draw = generate(spec);
  const Dataset data = drop_prefixed_covariates(draw.dataset, cell.exclude_prefixes);

  for (const MethodSpec& m : cell.methods) {
    const std::uint64_t method_seed = mix_seed(draw_seed, hash_name(m.name));
    try {
      MethodResult r;
      r.cell = cell.id;
      r.method = m.name;
      r.replication = rep;
      r.truth = draw.true_beta;
      r.record = run_method(data, m, method_seed);
      out.results.push_back(std::move(r));
    } catch (const std::exception& e) {
      out.failures.push_back({cell.id, m.name, rep, e.what()});
    }
  }
  return out;
}

}  // namespace

SimulationRun run_cells(const std::vector<SimCell>& cells, std::uint64_t global_seed,
                        int workers) {
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int rep = 0; rep < cells[c].replications; ++rep) tasks.push_back({c, rep});

  std::vector<TaskOutput> slots(tasks.size());

  if (workers <= 1) {
    // Serial reference path: same task decomposition, no thread pool.
    for (std::size_t t = 0; t < tasks.size(); ++t)
      slots[t] = run_task(cells[tasks[t].cell], tasks[t].replication, global_seed);
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::size_t t = 0; t < tasks.size(); ++t)
      slots[t] = run_task(cells[tasks[t].cell], tasks[t].replication, global_seed);
  }

  SimulationRun run;
  for (TaskOutput& slot : slots) {
    for (MethodResult& r : slot.results) run.results.push_back(std::move(r));
    for (RunFailure& f : slot.failures) run.failures.push_back(std::move(f));
  }
  return run;
}

void write_results_jsonl(const std::string& path, const SimulationRun& run) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot open '" + path + "' for writing");
  for (const MethodResult& r : run.results) {
    nlohmann::json j = to_json(r.record);
    j["cell"] = r.cell;
    j["method"] = r.method;
    j["rep"] = r.replication;
    j["truth"] = r.truth;
    out << j.dump() << "\n";
  }
}

namespace {

struct GroupKey {
  std::string cell, method;
  bool operator<(const GroupKey& o) const {
    return cell != o.cell ? cell < o.cell : method < o.method;
  }
};

struct Grouped {
  std::vector<double> thetas, ses, mws, mys;
  double truth = 1.0;
};

std::map<GroupKey, Grouped> group_results(const std::vector<MethodResult>& results) {
  std::map<GroupKey, Grouped> groups;
  for (const MethodResult& r : results) {
    Grouped& g = groups[{r.cell, r.method}];
    g.thetas.push_back(r.record.theta);
    g.ses.push_back(r.record.std_error);
    g.mws.push_back(r.record.mse_w);
    g.mys.push_back(r.record.mse_y);
    g.truth = r.truth;
  }
  return groups;
}

}  // namespace

void write_summary_csv(const std::string& path, const std::vector<MethodResult>& results) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot open '" + path + "' for writing");
  out << "cell,method,n,truth,mean,median,q1,q3,bias,mae,median_se,mean_mse_w,mean_mse_y\n";
  for (const auto& [key, g] : group_results(results)) {
    const CellSummary s = summarize(g.thetas, g.truth);
    double mw = 0.0, my = 0.0;
    for (double v : g.mws) mw += v;
    for (double v : g.mys) my += v;
    mw /= static_cast<double>(g.mws.size());
    my /= static_cast<double>(g.mys.size());
    out << key.cell << ',' << key.method << ',' << g.thetas.size() << ',' << g.truth << ','
        << s.mean << ',' << s.median << ',' << s.q1 << ',' << s.q3 << ',' << s.bias << ','
        << s.mae << ',' << median(g.ses) << ',' << mw << ',' << my << "\n";
  }
}

void write_boxplot_csv(const std::string& path, const std::vector<MethodResult>& results) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot open '" + path + "' for writing");
  out << "cell,method,whisker_lo,q1,median,q3,whisker_hi,n_outliers,outliers\n";
  for (const auto& [key, g] : group_results(results)) {
    const BoxplotStats b = boxplot_stats(g.thetas);
    out << key.cell << ',' << key.method << ',' << b.whisker_lo << ',' << b.q1 << ','
        << b.median << ',' << b.q3 << ',' << b.whisker_hi << ',' << b.outliers.size() << ',';
    for (std::size_t i = 0; i < b.outliers.size(); ++i) {
      if (i) out << ';';
      out << b.outliers[i];
    }
    out << "\n";
  }
}

JsonlReadResult read_results_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");
  JsonlReadResult out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      MethodResult r;
      r.cell = j.at("cell").get<std::string>();
      r.method = j.at("method").get<std::string>();
      r.replication = j.value("rep", 0);
      r.truth = j.value("truth", 1.0);
      r.record = estimate_record_from_json(j);
      out.results.push_back(std::move(r));
    } catch (const std::exception& e) {
      out.malformed.push_back(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dml
