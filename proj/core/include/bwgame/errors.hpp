#pragma once

#include <stdexcept>
#include <string>

namespace bwgame {

/// An argument lies outside the mathematical domain of an operation
/// (non-positive price, bandwidth outside [0, d], broken ordering hypothesis).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed user input: instance files, scenarios, CLI ranges.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative procedure stopped without reaching its termination band.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A protocol run was aborted by the uploader.
class ProtocolAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bwgame
