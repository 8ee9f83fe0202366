#pragma once

#include <stdexcept>

namespace aafusion {

/// Base class for all recoverable library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A covariance could not be factorized even after one jitter retry.
class SingularCovarianceError : public Error {
public:
    using Error::Error;
};

/// Moment matching over a part-set with zero total mass.
class DegenerateClusterError : public Error {
public:
    using Error::Error;
};

/// Ranked assignment found no feasible association hypothesis.
class AssociationError : public Error {
public:
    using Error::Error;
};

/// A fitted mixture does not line up with the export mapping it came from.
class MappingError : public Error {
public:
    using Error::Error;
};

/// Fusion weights do not sum to one, or the fused mixtures disagree in dimension.
class FusionWeightError : public Error {
public:
    using Error::Error;
};

/// Nearest-component assignment was requested against an empty local mixture.
class AssignmentError : public Error {
public:
    using Error::Error;
};

/// A variational assignment violates the feasibility constraints of the bound.
class ConstraintError : public Error {
public:
    using Error::Error;
};

/// Malformed scenario, topology or command-line configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Reserved feature that is intentionally not available.
class NotImplementedError : public Error {
public:
    using Error::Error;
};

/// Broken internal invariant (e.g. a fit objective that increased).
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace aafusion
