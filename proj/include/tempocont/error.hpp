#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tempocont {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument: size mismatch, empty input, out-of-range hyperparameter.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The math has no answer for this input (zero-length encoding, ray misses
/// the ground plane, non-finite loss).
class DomainError : public Error {
public:
    using Error::Error;
};

class DegenerateEncoding : public DomainError {
public:
    using DomainError::DomainError;
};

class NoIntersection : public DomainError {
public:
    using DomainError::DomainError;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed dataset, checkpoint or camera file. `line()` is 1-based, 0 when
/// the problem is not tied to a line (e.g. truncated file).
class ParseError : public IoError {
public:
    ParseError(const std::string& what, std::size_t line)
        : IoError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace tempocont
