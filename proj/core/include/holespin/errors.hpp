#pragma once

#include <stdexcept>
#include <string>

namespace holespin {

/// Bad input: out-of-range parameter, malformed file, violated precondition.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A ValidationError tied to one named configuration key.
class ParameterError : public ValidationError {
public:
  ParameterError(std::string key, const std::string& what)
      : ValidationError("parameter '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

/// Numerical failure: singular system, integrator budget exhausted, perturbative
/// regime left, and similar.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The heavy/light character of the hole doublet is ambiguous.
class RegimeError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace holespin
