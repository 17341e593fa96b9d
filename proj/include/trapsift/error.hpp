#pragma once

#include <stdexcept>
#include <string>

namespace trapsift {

/// Base of every error thrown by the library. The CLI maps kinds to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed document (JSON, CSV, JSON Lines). Carries a 1-based line and column when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")" : what),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Cross-reference failure: dangling ids, duplicates.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// A value violates a type invariant (score out of range, bad box).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Inputs are individually valid but do not fit together (unassigned location, bad flag combination).
class ConfigError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
};

class DecodeError : public Error {
public:
    using Error::Error;
};

/// Feature not available on this platform.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

} // namespace trapsift
