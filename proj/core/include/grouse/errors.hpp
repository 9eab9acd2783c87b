#pragma once

#include <stdexcept>
#include <string>

namespace grouse {

/// Violated precondition: bad dimensions, non-finite input, invalid configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown detected at run time.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input to an orthonormalization is numerically rank deficient.
class RankDeficient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The projection of an observation onto the current subspace vanished.
class DegenerateProjection : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace grouse
