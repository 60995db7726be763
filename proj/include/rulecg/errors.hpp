#pragma once

#include <stdexcept>

namespace rulecg {

// Malformed input: bad CSV, unknown columns, unusable labels.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid solver or run configuration (e.g. a complexity bound below 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rulecg
