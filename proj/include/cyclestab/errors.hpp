#pragma once

#include <stdexcept>
#include <string>

namespace cyclestab {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Division by zero and other undefined arithmetic.
class ArithmeticError : public Error {
  public:
    using Error::Error;
};

// Decimal exponent overflow. Raised by arithmetic; maps rethrow it as DivergenceError.
class OverflowError : public ArithmeticError {
  public:
    using ArithmeticError::ArithmeticError;
};

// A trajectory escaped. `state` holds the offending coordinates as decimal strings.
class DivergenceError : public Error {
  public:
    DivergenceError(const std::string& what, std::string state)
        : Error(what), state_(std::move(state)) {}
    const std::string& state() const { return state_; }

  private:
    std::string state_;
};

class ValidationError : public Error {
  public:
    using Error::Error;
};

class PreconditionError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class NonStabilizableError : public Error {
  public:
    using Error::Error;
};

// |1 + theta(s)| too small in the adaptive scheme.
class SingularWeightError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace cyclestab
