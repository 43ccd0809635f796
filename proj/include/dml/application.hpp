#pragma once

#include <map>
#include <string>
#include <vector>

#include "dml/dataset.hpp"

namespace dml {

// Maps a CSV file column to a canonical name with an optional unit scale.
struct ColumnMapping {
  std::string from;
  double scale = 1.0;
};

struct CsvSchema {
  std::map<std::string, ColumnMapping> columns;  // canonical name -> mapping

  static CsvSchema from_json_file(const std::string& path);
  /// Mapping for the common distribution of the housing file: median value
  /// in thousands of dollars, nox in parts per ten million, b pre-scaled.
  static CsvSchema housing_default();
};

/// Reads a comma-separated file with a header row into a Dataset of
/// canonical columns (outcome medv, treatment nox, covariates otherwise).
Dataset ingest_csv(const std::string& path, const CsvSchema& schema);

enum class TransformOp { Identity, Log, Square, Interaction };

struct Transform {
  std::vector<std::string> sources;  // 1 column (2 for Interaction)
  TransformOp op = TransformOp::Identity;
  std::string output;
  ColumnRole role = ColumnRole::Covariate;
};

// Variable specification applied on top of the canonical columns.
struct SpecRecipe {
  std::string name;
  std::vector<Transform> transforms;

  static SpecRecipe hr();    // the hedonic specification (transformed terms)
  static SpecRecipe raw();   // untransformed covariates
  static SpecRecipe flex();  // raw + squares + first-order interactions
  static SpecRecipe by_name(const std::string& name);
};

Dataset apply_recipe(const Dataset& d, const SpecRecipe& recipe);

}  // namespace dml
