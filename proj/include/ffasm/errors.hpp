#pragma once

#include <stdexcept>
#include <string>

namespace ffasm {

// Base class for all library errors so callers can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller-supplied argument is outside its documented domain.
struct InvalidArgument : Error {
  using Error::Error;
};

// Too few observations or subjects to carry out the operation.
struct InsufficientData : Error {
  using Error::Error;
};

// Kernel window at some evaluation point contains no observations.
struct BandwidthTooSmall : Error {
  using Error::Error;
};

// Covariance input is not symmetric (or otherwise unusable).
struct InvalidCovariance : Error {
  using Error::Error;
};

// Curve values, grids, or basis dimensions do not line up.
struct GridMismatch : Error {
  using Error::Error;
};

// Matrix blocks with incompatible shapes.
struct ShapeMismatch : Error {
  using Error::Error;
};

// Spectrum carries no signal where one is required (leading eigenvalue zero).
struct DegenerateSpectrum : Error {
  using Error::Error;
};

// Response vector incompatible with the requested family.
struct InvalidResponse : Error {
  using Error::Error;
};

// Numerical breakdown that is not attributable to a bad argument.
struct NumericalError : Error {
  using Error::Error;
};

// Malformed input file or unwritable output.
struct IoError : Error {
  using Error::Error;
};

}  // namespace ffasm
