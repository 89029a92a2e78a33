#pragma once

#include <stdexcept>
#include <string>

namespace ewom {

/// Base for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input, violated precondition, or malformed file. CLI maps this to exit code 2.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown (rank deficiency, identifiability). CLI maps this to exit code 1.
class NumericalError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, int iterations, double residual)
        : NumericalError(what + " (iterations=" + std::to_string(iterations) +
                         ", residual=" + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// External segmenter exited abnormally.
class SegmenterError : public Error {
public:
    SegmenterError(const std::string& what, int status)
        : Error(what + " (exit status " + std::to_string(status) + ")"), status_(status) {}

    int status() const noexcept { return status_; }

private:
    int status_;
};

}  // namespace ewom
