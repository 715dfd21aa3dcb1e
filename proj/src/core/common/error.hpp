#pragma once

#include <stdexcept>
#include <string>

namespace edgeserve {

enum class ErrorKind {
    InvalidSpec,
    MissingCalibration,
    Parse,
    Config,
    Numeric,
    Io,
    Argument,
    Domain,
};

/// Base exception for the simulator core. The kind drives the C API status
/// code and the CLI exit code (validation = 2, numeric = 3).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidSpec : public Error {
public:
    InvalidSpec(std::string field, const std::string& reason)
        : Error(ErrorKind::InvalidSpec, "invalid spec field '" + field + "': " + reason),
          field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class MissingCalibration : public Error {
public:
    explicit MissingCalibration(const std::string& what) : Error(ErrorKind::MissingCalibration, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

}  // namespace edgeserve
