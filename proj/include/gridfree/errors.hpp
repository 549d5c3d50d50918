#pragma once

#include <stdexcept>
#include <string>

namespace gridfree {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A noise level was requested for an all-zero signal.
class DegenerateSignalError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be inverted is numerically singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Every coefficient of a polynomial vanished.
class DegeneratePolynomialError : public Error {
 public:
  using Error::Error;
};

// The dual polynomial carries no support information (|H| constant).
class UnresolvableSignalError : public Error {
 public:
  using Error::Error;
};

// A root-based estimator found fewer admissible roots than requested.
class InsufficientRootsError : public Error {
 public:
  using Error::Error;
};

// Minimum-norm construction hit a vanishing first row.
class DegenerateSubspaceError : public Error {
 public:
  using Error::Error;
};

// Constrained least-l1 problem has no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Malformed scenario or snapshot file. Carries the location when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, std::string field = {})
      : Error(format(what, line, field)), line_(line), field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& what, int line,
                            const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + what;
  }

  int line_;
  std::string field_;
};

}  // namespace gridfree
