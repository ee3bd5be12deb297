#pragma once

#include <stdexcept>
#include <string>

namespace hus {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A cycle factor 1 + h*lambda_k vanishes; the discrete exponential is
/// identically zero past that point and no stability constant exists.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// |e(nh)| sits on the unit circle (within tolerance); the equation is not
/// Hyers-Ulam stable and the constant formula degenerates.
class NotStableError : public Error {
public:
    using Error::Error;
};

/// An index fell outside a trajectory's sample window.
class WindowError : public Error {
public:
    using Error::Error;
};

/// A finite-window computation could not certify its result (truncation
/// remainder too large for the requested window).
class InconclusiveError : public Error {
public:
    using Error::Error;
};

/// A simulated sample left the representable range.
class SimulationOverflowError : public Error {
public:
    using Error::Error;
};

/// Bad CLI flags or config file contents.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace hus
