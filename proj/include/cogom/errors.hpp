#pragma once

#include <stdexcept>
#include <string>

namespace cogom {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller handed in something malformed. The CLI maps these to exit code 1.
class ShapeError : public Error {
public:
  using Error::Error;
};
class ArgumentError : public Error {
public:
  using Error::Error;
};
class ValidationError : public Error {
public:
  using Error::Error;
};

// Numerical failures on well-formed input. The CLI maps these to exit code 3.
class NumericalError : public Error {
public:
  using Error::Error;
};
class ConvergenceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};
class GeometryError : public NumericalError {
public:
  using NumericalError::NumericalError;
};
class RankError : public NumericalError {
public:
  using NumericalError::NumericalError;
};
class SignalError : public NumericalError {
public:
  using NumericalError::NumericalError;
};
class DegenerateSpectrumError : public NumericalError {
public:
  using NumericalError::NumericalError;
};
class GenerationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// File system and parse failures. Exit code 2, except malformed content which
// is a ValidationError.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace cogom
