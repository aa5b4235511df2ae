#pragma once

#include <stdexcept>
#include <string>

namespace dmfit {

// Argument outside the mathematical domain of a function (x <= 0, NaN, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Vector or matrix shapes that do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A 64-bit tally or row total would wrap.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

class SingularHessianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Base for failures reported by the fitting drivers.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Some alpha component grew past SolverConfig::alpha_cap; the MLE is unbounded.
class DivergenceError : public FitError {
 public:
  using FitError::FitError;
};

// The MLE sits on the boundary alpha_k -> 0 (a category that is never observed).
class DegenerateDataError : public FitError {
 public:
  using FitError::FitError;
};

// No row carries any counts.
class EmptyDataError : public FitError {
 public:
  using FitError::FitError;
};

// Malformed input file. The message names the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dmfit
