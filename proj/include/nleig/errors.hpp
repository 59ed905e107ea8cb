#pragma once

#include <stdexcept>
#include <string>

namespace nleig {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input/configuration problems: wrong lengths, malformed files, bad parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

// Numerical failures (exit code 3 in the CLI).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Input lies in the nullspace (or argmin) where a quotient is undefined.
class DegenerateInputError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A field violates the hard constraint of a constrained functional.
class InfeasibleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A proximal step landed in the nullspace of the functional.
class ExtinctionError : public NumericalError {
 public:
  ExtinctionError(const std::string& what, double sigma, double sigma_dstar_lower)
      : NumericalError(what), sigma_(sigma), sigma_dstar_lower_(sigma_dstar_lower) {}

  double sigma() const { return sigma_; }
  // Lower bound on the extinction time of the input that went extinct.
  double sigma_dstar_lower() const { return sigma_dstar_lower_; }

 private:
  double sigma_;
  double sigma_dstar_lower_;
};

// Explicit flow integration diverged or hit a degenerate state.
class FlowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace nleig
