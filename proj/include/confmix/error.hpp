#pragma once

#include <stdexcept>
#include <string>

namespace confmix {

/// Error categories; the CLI maps them onto process exit codes.
enum class ErrorKind { usage = 2, data = 3, numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

/// Malformed or inconsistent input data (files, shapes, label vectors).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

/// Two configurations (or sets) that must share a sample axis do not.
class AlignmentInputError : public DataError {
public:
    using DataError::DataError;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

} // namespace confmix
