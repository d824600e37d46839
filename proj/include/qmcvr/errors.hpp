#pragma once

#include <stdexcept>
#include <string>

namespace qmcvr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// Root bracket for the drift equation not found, or iteration limit hit.
class DriftFailure : public Error {
public:
    using Error::Error;
};

/// The returned drift does not satisfy grad(ln g)(mu) = mu to tolerance.
class DriftInconsistency : public Error {
public:
    using Error::Error;
};

/// An iterate left the region where the integrand is positive.
class DomainExit : public Error {
public:
    using Error::Error;
};

class LaplaceDegenerate : public Error {
public:
    using Error::Error;
};

/// Monotonicity in the first variable does not hold, so the indicator
/// cannot be written as 1{z1 > gamma(z_rest)}.
class SeparabilityViolation : public Error {
public:
    using Error::Error;
};

/// The gradient information matrix carries no usable direction.
class MethodFailed : public Error {
public:
    using Error::Error;
};

class InternalConsistency : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace qmcvr
