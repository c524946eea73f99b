#pragma once

#include <stdexcept>
#include <string>

namespace kcm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or argument violates an operation's precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An exhaustive enumeration or state-space search exceeds its cap.
class SizeLimit : public Error {
 public:
  using Error::Error;
};

/// The degree-one gradient representation only exists at rho = m/(m+1).
class WrongDensity : public Error {
 public:
  using Error::Error;
};

/// A box expected to contain a mobile cluster does not.
class NoCluster : public Error {
 public:
  using Error::Error;
};

/// A quadrature or fit did not reach its accuracy target.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace kcm
