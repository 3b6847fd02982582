#pragma once

#include <stdexcept>
#include <string>

namespace pnn {

/// Failure category; the CLI maps each one to a distinct exit code.
enum class ErrorKind {
  Argument,
  Domain,
  Numerical,
  Convergence,
  Divergence,
  Parse,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ErrorKind::Argument, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorKind::Convergence, what) {}
};

/// Raised when an iterative solver's objective stops being finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : Error(ErrorKind::Divergence, what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long row = -1, long col = -1)
      : Error(ErrorKind::Parse, what), row_(row), col_(col) {}
  long row() const noexcept { return row_; }
  long col() const noexcept { return col_; }

 private:
  long row_;
  long col_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Rethrows `e` as the same category with `context` prepended to the message.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string msg = context + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::Argument: throw ArgumentError(msg);
    case ErrorKind::Domain: throw DomainError(msg);
    case ErrorKind::Numerical: throw NumericalError(msg);
    case ErrorKind::Convergence: throw ConvergenceError(msg);
    case ErrorKind::Divergence: {
      const auto* d = dynamic_cast<const DivergenceError*>(&e);
      throw DivergenceError(msg, d ? d->iteration() : -1);
    }
    case ErrorKind::Parse: {
      const auto* p = dynamic_cast<const ParseError*>(&e);
      throw ParseError(msg, p ? p->row() : -1, p ? p->col() : -1);
    }
    case ErrorKind::Io: throw IoError(msg);
  }
  throw Error(e.kind(), msg);
}

}  // namespace pnn
