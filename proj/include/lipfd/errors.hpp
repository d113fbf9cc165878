#pragma once

#include <stdexcept>
#include <string>

namespace lipfd {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data or arguments. CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& msg, int line)
        : ValidationError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class ArgumentError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Index or window out of the valid range.
class RangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Operation invoked on an object in the wrong state. Exit code 3.
class StateError : public Error {
public:
    using Error::Error;
};

/// Numeric guard tripped (non-finite loss, zero weight sum, ...). Exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace lipfd
