#pragma once

#include <stdexcept>
#include <string>

namespace czkit {

/// Argument outside the mathematical domain of an operation (time outside
/// the coefficient schedule, inadmissible exponent, unsupported order).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A symbol or coefficient set that fails its structural conditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Time nodes that do not contain every coefficient breakpoint.
class AlignmentError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed configuration file or command-line input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace czkit
