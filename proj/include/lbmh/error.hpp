#pragma once

#include <stdexcept>
#include <string>

namespace lbmh {

/// Invalid configuration or violated precondition. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure (non-convergence, divergence, unstable normalizer). Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lbmh
