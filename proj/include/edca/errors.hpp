#pragma once

#include <stdexcept>
#include <string>

namespace edca {

/// Malformed or unusable input data (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Search could not complete a single evaluation (CLI exit code 3).
class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical or structural failure while fitting a pipeline. Caught by the
/// evaluator and turned into worst fitness.
class PipelineFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edca
