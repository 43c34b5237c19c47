#pragma once

#include <stdexcept>
#include <string>

namespace fetreg {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// File could not be read/written or has an unsupported/corrupt format.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Too few jointly valid pixels to evaluate a cost or metric.
class InsufficientOverlapError : public Error {
public:
    explicit InsufficientOverlapError(const std::string& msg) : Error(msg) {}
};

/// Affine determinant outside the accepted [1/16, 16] band.
class DegenerateTransformError : public Error {
public:
    explicit DegenerateTransformError(const std::string& msg) : Error(msg) {}
};

/// LM normal equations stayed singular after full lambda escalation.
class SingularSystemError : public Error {
public:
    explicit SingularSystemError(const std::string& msg) : Error(msg) {}
};

/// Chained transforms produce a canvas beyond the configured limit.
class DegenerateChainError : public Error {
public:
    explicit DegenerateChainError(const std::string& msg) : Error(msg) {}
};

}  // namespace fetreg
