#pragma once

#include <stdexcept>
#include <string>

namespace mirror {

/// Argument outside the domain of an operation (t <= 0, mismatched spaces, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Pair of points joined by more than one minimal geodesic (e.g. antipodes).
class NonUniqueGeodesicError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Requested size exceeds a hard memory guard.
class LimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Operation not offered for this space or input.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Combination of inputs the pipeline does not offer (e.g. kc on the gasket).
class CapabilityError : public UnsupportedError {
 public:
  using UnsupportedError::UnsupportedError;
};

/// Malformed or out-of-range experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Internal identity failed beyond tolerance.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mirror
