#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hhinvex {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lexing/parsing failure; offset is the byte position in the source text.
struct ParseError : Error {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t off)
        : Error(msg + " at offset " + std::to_string(off)), offset(off) {}
};

// Evaluation hit a point outside the mathematical domain (log of a
// non-positive value, division by zero, ...) or produced a non-finite value.
struct DomainError : Error {
    using Error::Error;
};

struct NonDifferentiableError : Error {
    using Error::Error;
};

// Bad theorem parameter (p <= 1 where p > 1 is required, etc.).
struct ParameterError : Error {
    using Error::Error;
};

// eta(b,a) <= 0: the theorems integrate over [a, a + eta(b,a)] and require
// positive orientation.
struct OrientationError : ParameterError {
    using ParameterError::ParameterError;
};

// A certification or structural precondition of an operation is not met
// (positivity for log classes, Condition C for path equivalence, ...).
struct PreconditionError : Error {
    using Error::Error;
};

// Campaign configuration rejected during validation.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace hhinvex
