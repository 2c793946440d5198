#pragma once

#include <stdexcept>
#include <string>

namespace fwmbs {

/// Invalid or inconsistent configuration input.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure during propagation (NaN, overflow, divergence).
struct NumericalError : std::runtime_error {
  NumericalError(const std::string& module, const std::string& what) : std::runtime_error(module + ": " + what) {}
};

}  // namespace fwmbs
