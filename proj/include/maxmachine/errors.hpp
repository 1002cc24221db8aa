#pragma once

#include <stdexcept>
#include <string>

namespace maxmachine {

// Error families. The CLI maps them onto process exit codes:
// usage/config -> 2, data/parse -> 3, numerical/state -> 4.

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

class BoundsError : public Error {
  public:
    using Error::Error;
};

/// A caller violated an operation's precondition (e.g. resampling a clamped entry).
class ContractError : public Error {
  public:
    using Error::Error;
};

class StateError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

class DataError : public Error {
  public:
    using Error::Error;
};

class SizeError : public Error {
  public:
    using Error::Error;
};

class LookupError : public Error {
  public:
    using Error::Error;
};

class UnsupportedVersionError : public ParseError {
  public:
    using ParseError::ParseError;
};

/// Metric undefined for the given input (e.g. AUC with a single class).
class UndefinedMetricError : public StateError {
  public:
    using StateError::StateError;
};

} // namespace maxmachine
