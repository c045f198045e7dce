#pragma once

#include <stdexcept>
#include <string>

namespace stagnn {

// Error categories used across the library. Everything derives from
// std::runtime_error so callers that do not care about the category can
// still catch a single type.

// shape / axis mismatches between tensors
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// invalid numeric arguments (negative dilation, dropout p out of range, ...)
struct ParameterError : std::runtime_error {
  explicit ParameterError(const std::string& msg) : std::runtime_error(msg) {}
};

// misuse of an API contract (backward twice on one tape, ...)
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// malformed input files
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// degenerate clustering states (K > distinct points, empty cluster, ...)
struct ClusteringError : std::runtime_error {
  explicit ClusteringError(const std::string& msg) : std::runtime_error(msg) {}
};

// inconsistent run configuration
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// saved artifacts that do not fit the requested run (wrong shapes, missing
// or corrupt checkpoint fields, ...)
struct ArtifactError : std::runtime_error {
  explicit ArtifactError(const std::string& msg) : std::runtime_error(msg) {}
};

// a selector (unit filter, window index, ...) that matches nothing
struct SelectionError : std::runtime_error {
  explicit SelectionError(const std::string& msg) : std::runtime_error(msg) {}
};

// training produced a non-finite loss
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& msg, int trial, int epoch, int batch)
      : std::runtime_error(msg), trial(trial), epoch(epoch), batch(batch) {}
  int trial;
  int epoch;
  int batch;
};

}  // namespace stagnn
