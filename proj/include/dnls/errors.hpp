#pragma once

#include <stdexcept>
#include <string>

namespace dnls {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data violates a structural or physical constraint.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Potential has a real-axis spectral singularity (|a| too small on the grid).
class ResonanceError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Grid too coarse for the requested evaluation.
class ResolutionError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double cond)
        : Error(what + " (condition estimate " + std::to_string(cond) + ")"), condition(cond) {}
    double condition;
};

// Iterative or Newton-type procedure did not reach its target.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace dnls
