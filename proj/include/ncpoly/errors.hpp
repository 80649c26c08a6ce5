#pragma once

#include <stdexcept>
#include <string>

namespace ncpoly {

// Shape/size mismatches: non-square input, incompatible dimensions, wrong space.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Mathematically invalid input (valid shape, wrong content).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Input expected to be positive semidefinite is not, even within tolerance.
class NotPsdError : public DomainError {
public:
    NotPsdError(const std::string& what, double min_eigenvalue)
        : DomainError(what), min_eigenvalue(min_eigenvalue) {}
    double min_eigenvalue;
};

// L <= K fails; carries the most negative eigenvalue of the domination gap K - L.
class OrderingViolation : public DomainError {
public:
    OrderingViolation(const std::string& what, double min_gap_eigenvalue)
        : DomainError(what), min_gap_eigenvalue(min_gap_eigenvalue) {}
    double min_gap_eigenvalue;
};

// A postcondition that must hold for valid inputs failed; indicates a bug or
// tolerance miscalibration, never a bad input.
class InternalConsistencyError : public std::logic_error {
public:
    explicit InternalConsistencyError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace ncpoly
