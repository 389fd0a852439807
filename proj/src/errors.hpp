#pragma once

#include <stdexcept>
#include <string>

namespace randgad {

// Error taxonomy shared by the library, the C API status codes and the CLI
// exit codes. Everything user-facing derives from Error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad parameter values, unsupported ranges.
struct ArgumentError : Error {
    using Error::Error;
};

// Malformed or inconsistent input data (file formats, mismatched lengths).
struct DataError : Error {
    using Error::Error;
};

// NaN/Inf detected, or a metric that is undefined for the given input.
struct NumericError : Error {
    using Error::Error;
};

// A request that cannot be satisfied by the given graph (e.g. more anomaly
// slots than free nodes).
struct CapacityError : Error {
    using Error::Error;
};

// Broken internal invariant; indicates a bug, not a user mistake.
struct InternalError : Error {
    using Error::Error;
};

}  // namespace randgad
