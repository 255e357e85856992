#pragma once

#include <stdexcept>
#include <string>

namespace mpoc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched extents, qubit counts or chain lengths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A decomposition failed to converge or produced non-finite output.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a checked invariant (e.g. a non-unitary gate).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration: unknown model tag, unsupported order, depth too small.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A bond-dimension budget was exhausted.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, double last_cost)
      : Error(what), last_cost_(last_cost) {}
  double last_cost() const { return last_cost_; }

 private:
  double last_cost_;
};

/// Operation called in a state where it is not allowed.
class UsageError : public Error {
 public:
  using Error::Error;
};

class InternalStateError : public Error {
 public:
  using Error::Error;
};

class FileError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpoc
