#pragma once

#include <stdexcept>
#include <string>

namespace cgs {

/// Broad failure classes. The CLI maps each one to its own exit code.
enum class ErrorKind {
  InvalidArgument = 2,
  Parse = 3,
  Io = 4,
  Degenerate = 5,
  Estimation = 6,
  Numerical = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse, file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class DegenerateInput : public Error {
 public:
  explicit DegenerateInput(const std::string& what) : Error(ErrorKind::Degenerate, what) {}
};

/// A lag or dimension estimator could not produce an answer in the searched range.
class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& what) : Error(ErrorKind::Estimation, what) {}
};

/// Non-finite values produced during integration or estimation.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace cgs
