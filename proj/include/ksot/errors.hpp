#pragma once

#include <stdexcept>
#include <string>

namespace ksot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Points or matrices whose shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the mathematical domain of an operation
/// (non-positive Bessel argument, s <= d/2, a non-interior dual iterate, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that should be positive semidefinite could not be factorized,
/// even after the full jitter ladder.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

/// A grid, quadrature or problem size guard was exceeded.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A linear system in the Newton iteration could not be solved.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace ksot
