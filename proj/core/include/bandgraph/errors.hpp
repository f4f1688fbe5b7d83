#pragma once

#include <stdexcept>
#include <string>

namespace bandgraph {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument, dimension mismatch, malformed specification.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

/// Bad file contents or unreadable/unwritable paths.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

/// Numeric failure: non-positive-definite matrix, domain violation, overflow.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

/// Iterative routine failed to reach its tolerance.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericError(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

}  // namespace bandgraph
