#pragma once

#include <stdexcept>
#include <string>

namespace prequant {

// Base class for all prequant errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or size violation: empty tensor, non-conforming matmul,
// non-power-of-two transform length, oversized dense Hadamard request.
struct DimensionError : Error {
    using Error::Error;
};

// Invalid parameter or configuration value: alpha outside [0,1],
// bit width outside [2,8], rejected scheme/granularity pairing,
// malformed experiment config.
struct ParamError : Error {
    using Error::Error;
};

// File I/O and on-disk format problems.
struct IoError : Error {
    using Error::Error;
};

// Malformed NPY magic/header/payload.
struct NpyHeaderError : IoError {
    using IoError::IoError;
};

// NPY file whose array is not rank 2.
struct NpyRankError : IoError {
    using IoError::IoError;
};

// NPY dtype other than little-endian float32/float64.
struct NpyDtypeError : IoError {
    using IoError::IoError;
};

// Numerical contract violation: undefined signal in SQNR,
// failed transform identity in self-test mode.
struct NumericError : Error {
    using Error::Error;
};

} // namespace prequant
