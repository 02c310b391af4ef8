#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sarah {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A rate formula was evaluated outside its admissible parameter range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The problem has no curvature (L = 0) or is otherwise unusable.
class DegenerateProblem : public Error {
 public:
  using Error::Error;
};

class UnsupportedObjective : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Exact enumeration would visit more than the allowed number of sequences.
class CombinatorialGuard : public Error {
 public:
  using Error::Error;
};

/// The reference solver hit its iteration cap before reaching tolerance.
class UnresolvedReference : public Error {
 public:
  using Error::Error;
};

}  // namespace sarah
