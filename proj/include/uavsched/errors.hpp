#pragma once

#include <stdexcept>
#include <string>

namespace uavsched {

// Invalid configuration or input; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Valid input that this implementation deliberately does not support
// (e.g. non-integer Nakagami shape).
class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A runtime contract violation such as stepping a terminal state.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uavsched
