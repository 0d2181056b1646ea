#pragma once

#include <stdexcept>
#include <string>

namespace paretotab {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

  // The same error with `prefix` (e.g. a file name) in front of the message.
  static ParseError with_context(const std::string& prefix, const ParseError& e) {
    return ParseError(prefix + ": " + e.what(), e.line_, Verbatim{});
  }

 private:
  struct Verbatim {};
  ParseError(const std::string& what, std::size_t line, Verbatim) : Error(what), line_(line) {}

  std::size_t line_;
};

// Input is well formed but violates a data invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An estimator could not produce an answer (non-convergence, boundary hit,
// singular information, insufficient groups).
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace paretotab
