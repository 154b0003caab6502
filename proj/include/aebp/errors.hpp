#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aebp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A table (or every extreme of a bound) has zero total mass.
class ZeroMassError : public Error {
 public:
  using Error::Error;
};

class UnknownVariableError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration refused: too many variables.
class TooLargeError : public Error {
 public:
  using Error::Error;
};

/// Tree-only algorithm met a cycle (or an insufficient cutset).
class CyclicModelError : public Error {
 public:
  using Error::Error;
};

/// A bound operation would exceed the extreme-point cap.
class ExtremeCapError : public Error {
 public:
  using Error::Error;
};

/// Scope precondition violated (summing a variable not in scope, missing
/// incoming message, mismatched bound scope, ...).
class ScopeError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

/// chooseNonConvergedChild called on a component whose children all converged.
class AllConvergedError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace aebp
