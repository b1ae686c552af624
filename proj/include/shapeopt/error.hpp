#pragma once

#include <stdexcept>
#include <string>

namespace shapeopt {

// Error categories map one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or unknown configuration values (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Bad input data: unparsable files, invalid meshes, missing stage artifacts (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

/// A stage was run before the stage that produces its inputs.
class StageDependencyError : public DataError {
public:
    using DataError::DataError;
};

class EmptySurfaceError : public DataError {
public:
    using DataError::DataError;
};

/// Non-finite values during numeric work (exit code 4).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace shapeopt
