#pragma once

#include <stdexcept>
#include <string>

namespace procml {

/// Base class for all procml errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Problems with input data: malformed files, mismatched shapes, empty samples.
struct DataError : Error {
    using Error::Error;
};

/// Numerical failures: degenerate geometry, undefined fits.
struct NumericError : Error {
    using Error::Error;
};

struct ShapeMismatch : DataError {
    using DataError::DataError;
};

struct EmptySample : DataError {
    using DataError::DataError;
};

struct InvalidSplit : DataError {
    using DataError::DataError;
};

struct InvalidSpec : DataError {
    using DataError::DataError;
};

struct NoData : DataError {
    using DataError::DataError;
};

struct ParseError : DataError {
    using DataError::DataError;
};

struct InvalidArgument : DataError {
    using DataError::DataError;
};

struct DegenerateShape : NumericError {
    using NumericError::NumericError;
};

struct BoundaryUndefined : NumericError {
    using NumericError::NumericError;
};

} // namespace procml
