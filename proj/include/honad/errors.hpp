#pragma once

#include <stdexcept>
#include <string>

namespace honad {

/// Base class for all honad errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file (carries a "file:line: message" style what()).
struct ParseError : Error {
    using Error::Error;
};

/// Structurally inconsistent data (non-contiguous windows, broken suffix
/// closure, ...).
struct StructuralError : Error {
    using Error::Error;
};

/// Invalid argument or violated operation precondition.
struct ArgumentError : Error {
    using Error::Error;
};

/// A distance is mathematically undefined for the given pair of graphs
/// (e.g. empty edge intersection for the MCS metric). The pipeline records
/// these as skipped data points rather than failures.
struct UndefinedDistanceError : Error {
    using Error::Error;
};

/// Iterative solver failed to converge; carries the last residual.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), residual(residual) {}
    double residual;
};

/// Broken internal invariant; indicates a bug, not bad input.
struct InternalError : Error {
    using Error::Error;
};

} // namespace honad
