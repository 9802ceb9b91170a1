#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace virtmet {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NearParallel : public Error {
public:
    using Error::Error;
};

class DegenerateCloud : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class ZeroFlatnessInput : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed text input. `line()` is 1-based (a row number for CSV input).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class OutOfTable : public Error {
public:
    using Error::Error;
};

class NotImplemented : public Error {
public:
    using Error::Error;
};

class TooManyFactors : public Error {
public:
    using Error::Error;
};

class IncompletePlan : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Configuration validation failure; `field()` is the dotted key path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace virtmet
