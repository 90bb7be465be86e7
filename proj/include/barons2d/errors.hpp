#pragma once

#include <stdexcept>
#include <string>

namespace barons2d {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value violates one of the parameter invariants.
/// `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Two fields (or a field and an operator) live on different grids.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// A pointwise input that must be nonnegative was not.
class NegativeInput : public Error {
public:
    using Error::Error;
};

/// A snapshot or config file is malformed, truncated, or of an unknown version.
class FormatError : public Error {
public:
    using Error::Error;
};

/// An iterative linear method stagnated or a factorization failed.
class SolverBreakdown : public Error {
public:
    using Error::Error;
};

/// A nonlinear iteration hit its iteration cap above tolerance.
/// Concrete solvers derive from this and attach their report.
class NonConvergence : public Error {
public:
    using Error::Error;
};

}  // namespace barons2d
