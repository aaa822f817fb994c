#pragma once

#include <stdexcept>
#include <string>

namespace hardy {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation could not produce a trustworthy number (degenerate region,
/// ill-conditioned Gram system, unstable truncation, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments or malformed experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace hardy
