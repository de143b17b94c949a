#pragma once

#include <stdexcept>
#include <string>

namespace lvopt {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where the model is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A flight simulation could not be carried through (mass depletion,
/// inconsistent schedule, vehicle below the surface, ...).
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lvopt
