#pragma once

#include <stdexcept>
#include <string>

namespace deffuant {

// Malformed configuration or out-of-domain parameter values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The requested operation is not defined for the given metric or distribution
// (e.g. hull minimisation under the discrete metric).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation was violated by its inputs.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace deffuant
