#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qplab {

/// Input outside the mathematical domain of an operation (state leaves U, theta outside [0,1], ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Time interval or index outside what a trajectory covers.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Direct solver breakdown; carries the offending pivot row.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::ptrdiff_t pivot)
        : std::runtime_error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}

    std::ptrdiff_t pivot() const noexcept { return pivot_; }

private:
    std::ptrdiff_t pivot_;
};

class NonconvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qplab
