#pragma once

#include <stdexcept>
#include <string>

namespace splitstep {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Precondition violation: bad mesh parameters, exponents out of range,
/// mismatched sizes, negative weights, time outside the horizon, and so on.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Config file could not be parsed or describes an inconsistent experiment.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace splitstep
