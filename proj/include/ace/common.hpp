#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ace {

// Thrown when operand shapes do not line up.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a numeric quantity that must be finite is not.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an estimator gets too little data to work with.
struct InsufficientDataError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a regressor or variable is degenerate (zero variance).
struct DegenerateVariableError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an iteration that is guaranteed to converge fails to,
// which signals an implementation bug rather than bad input.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ace
