#pragma once

#include <stdexcept>
#include <string>

namespace mvm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input data violates a documented invariant (names the offending field).
struct ValidationError : Error {
    using Error::Error;
};

/// Bad argument to an operation (out-of-range index, zero factor, ...).
struct ArgumentError : Error {
    using Error::Error;
};

/// Array shapes disagree.
struct ShapeError : Error {
    using Error::Error;
};

/// File missing, checksum mismatch, unsupported version, short read.
struct IoError : Error {
    using Error::Error;
};

/// NaN/Inf where finite values are required, degenerate statistics.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace mvm
