#pragma once

#include <stdexcept>
#include <string>

namespace funrec {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally incompatible inputs: mismatched grids, unpaired states, ...
struct StructuralError : Error {
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Invalid configuration or constructor arguments; raised before any
// computation starts.
struct ValidationError : Error {
    using Error::Error;
};

// Bandwidth/exponent combination whose Cesaro sum has no finite limit.
struct DivergenceError : Error {
    using Error::Error;
};

// Configuration violates a hypothesis required by the requested study.
struct InfeasibleError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// Degenerate data handed to a fitting routine.
struct FitError : Error {
    using Error::Error;
};

// A Monte Carlo estimate cannot reach the requested precision.
struct PrecisionError : Error {
    using Error::Error;
};

}  // namespace funrec
