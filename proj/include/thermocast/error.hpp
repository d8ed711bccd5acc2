#pragma once

#include <stdexcept>
#include <string>

namespace thermocast {

/// Failure categories. The CLI maps each one onto a process exit code.
enum class ErrorKind { Config = 2, Data = 3, Divergence = 4, Io = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(ErrorKind::Divergence, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace thermocast
