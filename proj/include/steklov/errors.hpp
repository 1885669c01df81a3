#pragma once

#include <stdexcept>
#include <string>

namespace steklov {

// Base of everything the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failures of the numerics (exit code 3 at the CLI).
struct NumericalError : Error {
  using Error::Error;
};

struct InvalidPotential : NumericalError {
  using NumericalError::NumericalError;
};

struct NearDirichletEigenvalue : NumericalError {
  using NumericalError::NumericalError;
};

struct SearchWindowError : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularSystem : NumericalError {
  using NumericalError::NumericalError;
};

struct InsufficientSmoothness : NumericalError {
  using NumericalError::NumericalError;
};

struct RangeError : NumericalError {
  using NumericalError::NumericalError;
};

struct CaseMismatch : NumericalError {
  using NumericalError::NumericalError;
};

struct DegenerateTrace : NumericalError {
  using NumericalError::NumericalError;
};

struct FitError : NumericalError {
  using NumericalError::NumericalError;
};

// Bad user input: malformed profiles, spectra, configs (exit code 2).
struct InvalidArgument : Error {
  using Error::Error;
};

struct ConfigError : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

}  // namespace steklov
