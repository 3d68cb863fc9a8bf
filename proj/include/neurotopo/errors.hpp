#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neurotopo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed SWC input. `line()` is 1-based; 0 when the problem is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Branching parameters whose mean tree size is infinite.
class DivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Generation ran past its order or node cap.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace neurotopo
