#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace mixsde {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax or name-resolution failure while parsing an expression.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Evaluation left the domain of an operation (log of a non-positive value, division by zero, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The solver produced a non-finite state.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::size_t step)
        : Error(what + " at step " + std::to_string(step)), reason_(what), step_(step) {}

    std::size_t step() const noexcept { return step_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string reason_;
    std::size_t step_;
};

/// Invalid configuration value; `field` is the dotted path of the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace mixsde
