#pragma once

#include <stdexcept>
#include <string>

namespace chanest {

/// Base class for every failure raised by the library. The exit code is what
/// the command-line front end reports for this category.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, int exit_code)
        : std::runtime_error(what), exit_code_(exit_code) {}

    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

/// Bad input: dimension mismatch, parameter outside the domain, malformed
/// configuration.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what, 2) {}
};

/// A numerical procedure failed (no convergence, broken invariant).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what, 3) {}
};

/// Eigenframe tracking could not decide how to continue a column.
class DegeneracyError : public NumericError {
public:
    explicit DegeneracyError(const std::string& what) : NumericError(what) {}
};

/// A Fisher-information term with vanishing probability but non-vanishing
/// derivative.
class DivergentFisherError : public Error {
public:
    explicit DivergentFisherError(const std::string& what) : Error(what, 4) {}
};

}  // namespace chanest
