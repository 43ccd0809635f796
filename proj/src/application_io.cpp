#include "dml/application.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dml {

namespace {

const std::vector<std::string> kRawCovariates = {"crim", "zn",  "indus", "chas",
                                                 "rm",   "age", "dis",   "rad",
                                                 "tax",  "ptratio", "b_trans", "lstat"};
const std::vector<std::string> kBinaryColumns = {"chas"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool is_binary_column(const std::string& name) {
  for (const auto& b : kBinaryColumns)
    if (b == name) return true;
  return false;
}

}  // namespace

CsvSchema CsvSchema::housing_default() {
  CsvSchema s;
  for (const char* same : {"crim", "zn", "indus", "chas", "rm", "age", "dis", "rad",
                           "tax", "ptratio"})
    s.columns[same] = {same, 1.0};
  s.columns["medv"] = {"medv", 1000.0};  // dollars
  s.columns["nox"] = {"nox", 10.0};      // parts per hundred million
  s.columns["b_trans"] = {"b", 1e-3};
  s.columns["lstat"] = {"lstat", 1e-2};
  return s;
}

CsvSchema CsvSchema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("schema: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IngestError("schema: invalid JSON in '" + path + "': " + e.what());
  }
  CsvSchema s;
  for (const auto& [canon, spec] : j.at("columns").items()) {
    ColumnMapping m;
    if (spec.is_string()) {
      m.from = spec.get<std::string>();
    } else {
      m.from = spec.at("from").get<std::string>();
      if (spec.contains("scale")) m.scale = spec.at("scale").get<double>();
    }
    s.columns[canon] = m;
  }
  return s;
}

Dataset ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestError("ingest: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw IngestError("ingest: '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;
  for (const auto& [canon, m] : schema.columns) {
    if (!col_index.count(m.from))
      throw IngestError("ingest: file column '" + m.from + "' (for '" + canon +
                        "') missing from header");
  }

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw IngestError("ingest: line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(header.size()));
    std::vector<double> vals(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const char* begin = fields[i].c_str();
      char* end = nullptr;
      vals[i] = std::strtod(begin, &end);
      if (end == begin || *end != '\0')
        throw IngestError("ingest: non-numeric cell '" + fields[i] + "' at line " +
                          std::to_string(line_no) + ", column '" + header[i] + "'");
    }
    rows.push_back(std::move(vals));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  std::vector<Column> cols;
  for (const auto& [canon, m] : schema.columns) {
    Column c;
    c.name = canon;
    c.role = canon == "medv"  ? ColumnRole::Outcome
             : canon == "nox" ? ColumnRole::Treatment
                              : ColumnRole::Covariate;
    c.values.resize(n);
    const std::size_t src = col_index.at(m.from);
    for (Eigen::Index r = 0; r < n; ++r) c.values[r] = rows[static_cast<std::size_t>(r)][src] * m.scale;
    cols.push_back(std::move(c));
  }
  return Dataset(std::move(cols));
}

SpecRecipe SpecRecipe::hr() {
  SpecRecipe r;
  r.name = "hr";
  r.transforms = {
      {{"nox"}, TransformOp::Square, "nox2", ColumnRole::Treatment},
      {{"medv"}, TransformOp::Log, "log_mv", ColumnRole::Outcome},
      {{"rm"}, TransformOp::Square, "rm2", ColumnRole::Covariate},
      {{"age"}, TransformOp::Identity, "age", ColumnRole::Covariate},
      {{"dis"}, TransformOp::Log, "log_dis", ColumnRole::Covariate},
      {{"rad"}, TransformOp::Log, "log_rad", ColumnRole::Covariate},
      {{"tax"}, TransformOp::Identity, "tax", ColumnRole::Covariate},
      {{"ptratio"}, TransformOp::Identity, "ptratio", ColumnRole::Covariate},
      {{"b_trans"}, TransformOp::Identity, "b_trans", ColumnRole::Covariate},
      {{"lstat"}, TransformOp::Log, "log_lstat", ColumnRole::Covariate},
      {{"crim"}, TransformOp::Identity, "crim", ColumnRole::Covariate},
      {{"zn"}, TransformOp::Identity, "zn", ColumnRole::Covariate},
      {{"indus"}, TransformOp::Identity, "indus", ColumnRole::Covariate},
      {{"chas"}, TransformOp::Identity, "chas", ColumnRole::Covariate},
  };
  return r;
}

SpecRecipe SpecRecipe::raw() {
  SpecRecipe r;
  r.name = "raw";
  r.transforms = {
      {{"nox"}, TransformOp::Square, "nox2", ColumnRole::Treatment},
      {{"medv"}, TransformOp::Log, "log_mv", ColumnRole::Outcome},
  };
  for (const auto& c : kRawCovariates)
    r.transforms.push_back({{c}, TransformOp::Identity, c, ColumnRole::Covariate});
  return r;
}

SpecRecipe SpecRecipe::flex() {
  SpecRecipe r = raw();
  r.name = "flex";
  for (const auto& c : kRawCovariates) {
    if (is_binary_column(c)) continue;  // square of a dummy duplicates it
    r.transforms.push_back({{c}, TransformOp::Square, c + "_sq", ColumnRole::Covariate});
  }
  for (std::size_t i = 0; i < kRawCovariates.size(); ++i)
    for (std::size_t j = i + 1; j < kRawCovariates.size(); ++j)
      r.transforms.push_back({{kRawCovariates[i], kRawCovariates[j]},
                              TransformOp::Interaction,
                              kRawCovariates[i] + "_x_" + kRawCovariates[j],
                              ColumnRole::Covariate});
  return r;
}

SpecRecipe SpecRecipe::by_name(const std::string& name) {
  if (name == "hr") return hr();
  if (name == "raw") return raw();
  if (name == "flex") return flex();
  throw ConfigError("unknown recipe '" + name + "' (expected hr/raw/flex)");
}

Dataset apply_recipe(const Dataset& d, const SpecRecipe& recipe) {
  std::vector<Column> cols;
  cols.reserve(recipe.transforms.size());
  for (const Transform& t : recipe.transforms) {
    for (const auto& src : t.sources) {
      if (!d.has_column(src))
        throw ConfigError("recipe '" + recipe.name + "': missing source column '" + src + "'");
    }
    Column out;
    out.name = t.output;
    out.role = t.role;
    const Eigen::VectorXd& a = d.column(t.sources[0]).values;
    switch (t.op) {
      case TransformOp::Identity:
        out.values = a;
        break;
      case TransformOp::Square:
        out.values = a.array().square();
        break;
      case TransformOp::Log:
        for (Eigen::Index i = 0; i < a.size(); ++i) {
          if (a[i] <= 0.0)
            throw ConfigError("recipe '" + recipe.name + "': log of non-positive value in '" +
                              t.sources[0] + "' at row " + std::to_string(i));
        }
        out.values = a.array().log();
        break;
      case TransformOp::Interaction:
        out.values = a.array() * d.column(t.sources[1]).values.array();
        break;
    }
    cols.push_back(std::move(out));
  }
  return Dataset(std::move(cols));
}

}  // namespace dml
