#pragma once

#include <stdexcept>
#include <string>

namespace dml {

/// Invalid configuration or argument values (bad K, malformed spec, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical failure: rank deficiency, degenerate variance, weak instrument.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File ingestion problems: missing columns, non-numeric cells, row mismatch.
class IngestError : public std::runtime_error {
 public:
  explicit IngestError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dml
