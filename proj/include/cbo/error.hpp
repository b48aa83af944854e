#pragma once

#include <stdexcept>
#include <string>

namespace cbo {

/// Base of every error thrown by the library. The CLI maps the concrete
/// type onto its exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: shape or dimension mismatch, empty inputs.
class InputError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment or objective configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A mathematical precondition of a formula does not hold (e.g. a
/// nonpositive decay rate where a positive one is required).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Non-finite values produced during evaluation or integration.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Problem too large for an exact algorithm.
class ScaleError : public Error {
public:
    using Error::Error;
};

/// Regression on data that cannot be log-transformed.
class FitError : public Error {
public:
    using Error::Error;
};

}  // namespace cbo
