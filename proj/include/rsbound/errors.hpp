#pragma once

#include <stdexcept>
#include <string>

namespace rsbound {

/// Invalid configuration value. `key()` names the offending config path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Phase continuation failed after the maximum refinement depth.
class UnwrapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An algebraic invariant failed beyond tolerance. Only a bug or an
/// under-resolved integrator can trigger this.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rsbound
