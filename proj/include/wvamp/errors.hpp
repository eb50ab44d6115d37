#pragma once

#include <stdexcept>
#include <string>

namespace wvamp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates a type invariant or an operation precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The postselected state has no overlap with the preselected one (r = 0).
class SingularPostselection : public Error {
 public:
  using Error::Error;
};

/// The mass spectrum is degenerate (delta_m = 0) where a split is required.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

/// A normalization integral vanished or a postselection is not defined.
class DegeneratePostselection : public Error {
 public:
  using Error::Error;
};

/// Numerical evaluation produced a non-finite or out-of-domain value.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wvamp
