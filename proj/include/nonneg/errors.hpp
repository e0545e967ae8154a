#pragma once

#include <stdexcept>
#include <string>

namespace nonneg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands violate an operation's contract (mismatched base points, dimensions, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent user input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A function handle cannot be evaluated at the requested point or order.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on data that fails its stated precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A construction could not be completed (search failed, geometry violated).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Enumeration or tuple budget exceeded.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace nonneg
