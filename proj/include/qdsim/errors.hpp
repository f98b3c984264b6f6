#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input rejected before any computation ran.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& what, std::size_t line)
      : InvalidArgument("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A scenario configuration field is missing or malformed. `field()` is a
/// dotted path into the config document.
class ValidationError : public InvalidArgument {
 public:
  ValidationError(std::string field, const std::string& what)
      : InvalidArgument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class BudgetError : public InvalidArgument {
 public:
  BudgetError(std::size_t required, std::size_t given)
      : InvalidArgument("segment budget " + std::to_string(given) +
                        " too small, at least " + std::to_string(required) + " segments required"),
        required_(required) {}
  std::size_t required_minimum() const { return required_; }

 private:
  std::size_t required_;
};

class NoWellsError : public Error {
 public:
  NoWellsError() : Error("no wells found in potential") {}
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public NumericError {
 public:
  QuadratureError(double achieved, double requested)
      : NumericError("matrix-element quadrature did not converge: achieved " +
                     std::to_string(achieved) + ", requested " + std::to_string(requested)),
        achieved_(achieved) {}
  double achieved_tolerance() const { return achieved_; }

 private:
  double achieved_;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(double last_energy, std::size_t steps)
      : NumericError("imaginary-time search not converged after " + std::to_string(steps) +
                     " steps, last energy " + std::to_string(last_energy)),
        last_energy_(last_energy) {}
  double last_energy() const { return last_energy_; }

 private:
  double last_energy_;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qdsim
