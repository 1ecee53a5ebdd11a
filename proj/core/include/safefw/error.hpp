#pragma once

#include <stdexcept>
#include <string>

namespace safefw {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent matrix/vector shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Loss of positive definiteness, singular systems, pivot stalls.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace safefw
