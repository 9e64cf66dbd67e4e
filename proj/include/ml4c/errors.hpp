#pragma once

#include <stdexcept>
#include <string>

namespace ml4c {

/// Base of every error thrown by the library. `exit_code()` follows the CLI
/// convention: 1 usage/config, 2 data error, 3 internal.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 3; }
};

class DataError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 1; }
};

class CycleDetected : public DataError { public: using DataError::DataError; };
class InvalidNodes : public DataError { public: using DataError::DataError; };
class OrientationConflict : public DataError { public: using DataError::DataError; };
class NodeMismatch : public DataError { public: using DataError::DataError; };
class LengthMismatch : public DataError { public: using DataError::DataError; };
class SkeletonMismatch : public DataError { public: using DataError::DataError; };
class SchemaMismatch : public DataError { public: using DataError::DataError; };
class DegenerateLabels : public DataError { public: using DataError::DataError; };
class IoError : public DataError { public: using DataError::DataError; };
class UnsupportedFeature : public DataError { public: using DataError::DataError; };

class ParseError : public DataError {
public:
    ParseError(const std::string& what, int line, int column)
        : DataError(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

} // namespace ml4c
