#pragma once

#include <stdexcept>
#include <string>

namespace mvtest {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input files (CSV): message names the offending line.
struct ParseError : Error {
    using Error::Error;
};

// Structurally invalid inputs: sizes, dimensions, non-finite values, bad grids.
struct ValidationError : Error {
    using Error::Error;
};

// A test was asked to run against a model lacking a required capability
// (cdf/pdf/sampler/estimator) or with an incompatible dimension.
struct CapabilityError : Error {
    using Error::Error;
};

// Numerical failure inside a transform or estimator (e.g. vanishing
// conditional density in the Rosenblatt denominator).
struct NumericError : Error {
    using Error::Error;
};

}  // namespace mvtest
