#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dml/simulation.hpp"

namespace dml {

struct MethodResult {
  std::string cell;
  std::string method;
  int replication = 0;
  double truth = 1.0;
  EstimateRecord record;
};

struct RunFailure {
  std::string cell;
  std::string method;
  int replication = 0;
  std::string message;
};

struct SimulationRun {
  std::vector<MethodResult> results;   // deterministic order: task order, method order
  std::vector<RunFailure> failures;
};

/// Executes every (cell, replication, method) task. `workers <= 1` runs the
/// serial reference path; larger values use the OpenMP pool. Output is
/// identical for any worker count.
SimulationRun run_cells(const std::vector<SimCell>& cells, std::uint64_t global_seed,
                        int workers);

/// FNV-1a, used to fold cell/method names into seed streams.
std::uint64_t hash_name(const std::string& s);

// Output writers (stable formats shared by the CLI and tests).
void write_results_jsonl(const std::string& path, const SimulationRun& run);
void write_summary_csv(const std::string& path, const std::vector<MethodResult>& results);
void write_boxplot_csv(const std::string& path, const std::vector<MethodResult>& results);

struct JsonlReadResult {
  std::vector<MethodResult> results;
  std::vector<std::string> malformed;  // "<path>:<line>: message"
};

JsonlReadResult read_results_jsonl(const std::string& path);

}  // namespace dml
