#pragma once

#include <stdexcept>
#include <string>

namespace isoperiod {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A phase point lies outside the admissible region of a system
/// (Kepler collision, non-positive population, non-finite component).
class DomainError : public Error {
public:
    DomainError(const std::string& what, int component = -1)
        : Error(what), component_(component) {}
    int component() const noexcept { return component_; }

private:
    int component_;
};

/// Invalid parameters or an operation requested on an unsuitable system.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// exp() argument out of the representable range.
class RangeError : public Error {
public:
    using Error::Error;
};

class NoUniqueEquilibrium : public Error {
public:
    using Error::Error;
};

class SurfaceUnreachable : public Error {
public:
    using Error::Error;
};

/// The requested energy is a critical value (the level set collapses).
class DegenerateSurface : public Error {
public:
    using Error::Error;
};

class NotConfining : public Error {
public:
    using Error::Error;
};

/// Implicit solve inside one integrator step did not converge.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, double residual, double time = 0.0)
        : Error(what), residual_(residual), time_(time) {}
    double residual() const noexcept { return residual_; }
    double time() const noexcept { return time_; }

private:
    double residual_;
    double time_;
};

}  // namespace isoperiod
