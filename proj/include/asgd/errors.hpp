#pragma once

#include <stdexcept>
#include <string>

namespace asgd {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a Gap denominator is non-positive or a gap vector is invalid.
struct InvalidGap : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg, std::string key = "")
      : std::runtime_error(msg), offending_key(std::move(key)) {}
  std::string offending_key;
};

// bound_check cannot run: required constants missing or degenerate.
struct CannotCheck : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedStrategy : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace asgd
