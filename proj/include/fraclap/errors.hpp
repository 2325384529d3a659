#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

/// Raised when an argument lies outside the domain an operation is defined on.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an iterative or local linear solve cannot produce a solution.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double relative_residual = 0.0, int iterations = 0)
        : std::runtime_error(what), relative_residual_(relative_residual), iterations_(iterations) {}

    double relative_residual() const noexcept { return relative_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double relative_residual_;
    int iterations_;
};

} // namespace fraclap
