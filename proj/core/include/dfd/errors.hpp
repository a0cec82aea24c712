#pragma once

#include <stdexcept>
#include <string>

namespace dfd {

/// Malformed configuration input (bad file, bad schema, inconsistent values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural requirement on the communication topology is not met
/// (not strongly connected, no pinned agent, degenerate spectrum).
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dfd
