#pragma once

/// @file error.hpp
/// Exception hierarchy used throughout the C++ core. The C API translates
/// these into status codes at the library boundary.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace structdiag {

/// Base of every error the library raises deliberately.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid model input (syntax, schema, or model invariants).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Syntax error with a 1-based source position.
class ParseError : public InputError {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : InputError(std::to_string(line) + ":" + std::to_string(column) + ": " +
                   msg),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A reference to an equation, variable, or fault the model does not have.
class UnknownIdError : public Error {
 public:
  using Error::Error;
};

/// An analysis was asked to run on input violating its precondition,
/// e.g. a redundancy query on a set that is not PSO.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Brute-force oracle asked to enumerate a set larger than its bound.
class OracleBoundError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Structurally valid but numerically degenerate linear computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace structdiag
