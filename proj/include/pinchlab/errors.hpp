/// @file errors.hpp
/// @brief Exception hierarchy shared by all pinchlab modules.
#pragma once

#include <stdexcept>
#include <string>

namespace pinchlab {

/// Base class for every error raised by the library.
class PinchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (log of a
/// non-positive number, inadmissible parameters, ...).
class DomainError : public PinchError {
public:
    using PinchError::PinchError;
};

/// Eigenvalues supplied out of order where an ordered triple was required.
class OrderingError : public PinchError {
public:
    using PinchError::PinchError;
};

/// The closed-form isotropic solution has no value past its blow-up time.
class BlowUpReached : public PinchError {
public:
    using PinchError::PinchError;
};

/// Dense-output query outside the interval covered by a trajectory.
class OutOfRange : public PinchError {
public:
    using PinchError::PinchError;
};

/// Rejection sampler ran out of its retry budget.
class SamplingExhausted : public PinchError {
public:
    using PinchError::PinchError;
};

/// A grid scan found no grid point inside the requested region.
class EmptyRegion : public PinchError {
public:
    using PinchError::PinchError;
};

/// Initial state of a trajectory fails the hypothesis of an estimate.
class HypothesisViolated : public PinchError {
public:
    using PinchError::PinchError;
};

/// Malformed command line or configuration file.
class ConfigError : public PinchError {
public:
    using PinchError::PinchError;
};

/// File could not be opened, written or parsed.
class IoError : public PinchError {
public:
    using PinchError::PinchError;
};

}  // namespace pinchlab
