// Exception types thrown by the library. The CLI maps ParseError and
// ValidationError (and subclasses) to exit code 1 with a structured message;
// usage errors are handled by the argument parser with exit code 2.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace phishpanel {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Design matrix is rank deficient; message lists the dependent columns and
// the columns they are linear combinations of. The dependent column names
// are also carried structurally so callers can prune and refit.
struct CollinearityError : ValidationError {
  explicit CollinearityError(const std::string& msg, std::vector<std::string> dependent = {})
      : ValidationError(msg), dependent_columns(std::move(dependent)) {}
  std::vector<std::string> dependent_columns;
};

// A column perfectly separates the binary response; no finite MLE exists.
struct SeparationError : ValidationError {
  explicit SeparationError(const std::string& msg) : ValidationError(msg) {}
};

struct ConvergenceError : ValidationError {
  explicit ConvergenceError(const std::string& msg) : ValidationError(msg) {}
};

// A treatment-model probability of the observed arm fell below the
// positivity floor; identification has failed for that exposure.
struct PositivityError : ValidationError {
  explicit PositivityError(const std::string& msg) : ValidationError(msg) {}
};

}  // namespace phishpanel
