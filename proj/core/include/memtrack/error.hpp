#pragma once

#include <stdexcept>
#include <string>

namespace memtrack {

/// Raised when an operation is called with arguments outside its contract
/// (shape mismatch, empty input, invalid hyper-parameter).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The tracker cannot continue (degenerate box, target lost outside frame).
class TrackingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a NaN/Inf loss; the message carries the diagnostics.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace memtrack

#define MEMTRACK_EXPECTS(cond, msg)                                        \
  do {                                                                     \
    if (!(cond)) throw ::memtrack::ContractViolation(std::string(msg));    \
  } while (false)
