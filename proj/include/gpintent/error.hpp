#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpintent {

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a Gram matrix cannot be factorized even after the largest jitter.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double jitter)
        : std::runtime_error(what), jitter_(jitter) {}
    double jitter() const noexcept { return jitter_; }

private:
    double jitter_;
};

class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class OutOfOrder : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Point lies behind the gaze origin (non-positive projection on the ray).
class BehindUser : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class NoCandidate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace gpintent
