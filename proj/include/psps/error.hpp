#pragma once

#include <stdexcept>
#include <string>

namespace psps {

/// Base of every error raised by the library. `exit_code()` is the process
/// status the CLI reports for it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 3; }
};

/// Malformed input file: bad syntax, missing field, wrong type.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A record refers to an id that does not exist.
class ReferenceError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Duplicate key in a keyed input (e.g. demand rows).
class DuplicateError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Geometry outside the raster extent.
class BoundsError : public Error {
public:
    using Error::Error;
};

/// Rasters or pixel sets that do not share a grid.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Not enough observations to compute a statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Inconsistent arguments handed to a pure function.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// LP/MILP failure: infeasible where feasibility is guaranteed, no incumbent,
/// numerical breakdown.
class SolverError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

} // namespace psps
