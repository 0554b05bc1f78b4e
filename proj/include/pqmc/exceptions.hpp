#pragma once

#include <stdexcept>

namespace pqmc {

/// A base that is not a prime, or a set of bases that are not pairwise distinct.
class InvalidBase : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operands with different bases or precisions.
class IncompatibleOperands : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A quadrature resolution that is incompatible with the requested cells.
class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that would exceed a memory or enumeration budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A result that violates a mathematical invariant beyond rounding tolerance,
/// e.g. a squared error that is clearly negative.
class NumericalConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pqmc
