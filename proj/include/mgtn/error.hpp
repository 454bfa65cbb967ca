#pragma once

#include <stdexcept>
#include <string>

namespace mgtn {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-conforming shapes, mode indices or rank tuples.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or divergent optimisation (CLI exit code 4).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace mgtn
