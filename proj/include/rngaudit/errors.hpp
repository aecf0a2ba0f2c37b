#pragma once

#include <stdexcept>
#include <string>

namespace rngaudit {

// Invalid parameters or an unusable configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numeric routine was called outside its domain (NaN, a <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The bit source or block cannot supply what a test needs.
class InsufficientInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A level-1 result violated its contract (p-value outside [0,1], ...).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Too many discarded level-1 applications: the test cannot run at this n.
class InapplicableTest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rngaudit
