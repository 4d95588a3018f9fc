#pragma once

#include <stdexcept>
#include <string>

namespace hdpower {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: shape mismatches, out-of-range parameters, non-finite data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Data for which a quantity is undefined (all points identical, zero variance).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

/// Too few rows for an estimator (e.g. n < 2 for an unbiased statistic).
class InsufficientSampleError : public Error {
 public:
  using Error::Error;
};

/// Paired statistics given inputs with different row counts.
class PairingError : public Error {
 public:
  using Error::Error;
};

/// A two-sample operation given an independence scenario or vice versa.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// Experiment or config validation failure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Quadrature that failed to converge, or a Monte Carlo cell with too many failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hdpower
