#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zecap {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed machine document. Line and column are 1-based; zero when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A machine description violates one of the structural invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A noise symbol does not label any outgoing edge of the current state.
class InfeasibleNoise : public Error {
public:
    using Error::Error;
};

/// A configured search or size guard was exceeded. Never a wrong answer.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// An exact integer count does not fit the counter type.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Power iteration failed to settle within its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// An operation was called outside of its documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

} // namespace zecap
