#pragma once

#include <stdexcept>
#include <string>

namespace ulight {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape or size mismatch between an input and the object it is applied to.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Non-finite or otherwise invalid numeric state. Carries the offending
/// sample index and/or training step when known (-1 otherwise).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg, long sample_index = -1, long step = -1)
        : Error(msg), sample_index(sample_index), step(step) {}

    long sample_index;
    long step;
};

/// File or argument problems surfaced by the CLI layer.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ulight
