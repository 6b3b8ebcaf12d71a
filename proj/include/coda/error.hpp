#pragma once

#include <stdexcept>
#include <string>

namespace coda {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (bad line, bad field, unknown enum value).
struct ParseError : Error {
    ParseError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_number(line) {}
    long line_number;
};

// A precondition or invariant violation on otherwise well-formed input.
struct ValidationError : Error {
    using Error::Error;
};

// Model training failed (degenerate labels, non-finite features).
struct TrainError : Error {
    using Error::Error;
};

}  // namespace coda
