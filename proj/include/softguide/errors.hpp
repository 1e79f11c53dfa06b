#pragma once

#include <stdexcept>
#include <string>

namespace softguide {

// Parameter or precondition violation by the caller.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inputs are valid but outside the regime where the requested quantity exists.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A solver failed to deliver a certified answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace softguide
