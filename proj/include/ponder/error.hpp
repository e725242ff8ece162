#pragma once

#include <stdexcept>
#include <string>

namespace ponder {

/// A parameter outside its physical domain, or a malformed configuration.
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that could not produce a trustworthy number.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// P(x) underflows: the outcome lies so far from every pointer peak that the
/// conditional state is not representable.
class DegenerateOutcomeError : public NumericalError {
  public:
    explicit DegenerateOutcomeError(double x)
        : NumericalError("degenerate outcome: P(x) underflows at x = " + std::to_string(x)), x_(x) {}
    double x() const { return x_; }

  private:
    double x_;
};

/// Integration step too coarse for the fastest time scale of a sector.
class StepSizeError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// Fock-space cutoff too small for the requested meter state.
class TruncationError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

} // namespace ponder
