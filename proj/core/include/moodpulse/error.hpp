#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace moodpulse {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or unresolvable configuration (bad zone, out-of-range parameter, unreadable resource).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input record. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input data violates an operation's precondition (too short, empty, non-finite, rank deficient).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace moodpulse
