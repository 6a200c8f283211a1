#pragma once

#include <stdexcept>
#include <string>

namespace sldcn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (basis size, grid size).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Right-hand side of a Neumann problem has a nonzero mean.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// A numerical kernel failed to converge or factorize.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Operation is not defined for the given arguments.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Malformed snapshot, CSV or configuration input.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Solution diverged; carries the index of the step that produced it.
class BlowUpError : public Error {
 public:
  BlowUpError(long step, const std::string& what)
      : Error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace sldcn
