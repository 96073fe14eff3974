#pragma once

#include <stdexcept>
#include <string>

namespace echoloc {

/// Bad input: malformed files, out-of-range parameters, invalid indices.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Numerical failure: eigensolver residuals, unstable symbols, disconnected spectra.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by spectral_gap when lambda_1 vanishes.
class DisconnectedGraph : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace echoloc
