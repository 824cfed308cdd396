#pragma once

#include <stdexcept>
#include <string>

namespace hhlab {

/// Violated precondition or malformed input. Maps to CLI exit status 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: integration failure, divergent quadrature, bad field
/// data. Maps to CLI exit status 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IntegrabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Raised by the vector field when w0 < 0; the integrator turns it into a
/// NonPositive termination.
class NonPositiveState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace hhlab
