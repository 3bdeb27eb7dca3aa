#pragma once

#include <stdexcept>
#include <string>

namespace qplab {

// Base of every error the library throws. Numerical failures and invalid
// input are kept apart so the CLI can map them onto distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid arguments: negative times, inverted intervals, bad parameters.
class DomainError : public Error {
public:
    using Error::Error;
};

class SizeError : public DomainError {
public:
    using DomainError::DomainError;
};

class DegenerateDensityError : public DomainError {
public:
    using DomainError::DomainError;
};

class NormalizationError : public DomainError {
public:
    using DomainError::DomainError;
};

// Propagator evaluated at a caustic (sin t = 0) or at t = 0.
class SingularityError : public DomainError {
public:
    using DomainError::DomainError;
};

// Large-friction formulas used before t > 1/(2 beta).
class RegimeError : public DomainError {
public:
    using DomainError::DomainError;
};

class ConstraintError : public DomainError {
public:
    using DomainError::DomainError;
};

class BranchError : public DomainError {
public:
    using DomainError::DomainError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Numerical failures: time step too large, mass leaking through the box,
// solver divergence.
class NumericalError : public Error {
public:
    using Error::Error;
};

class StabilityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BoxError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SpectrumError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace qplab
