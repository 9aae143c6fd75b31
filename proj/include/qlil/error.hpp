#pragma once

#include <stdexcept>
#include <string>

namespace qlil {

// Configuration or precondition violations: bad parameters, malformed input,
// grids that do not meet an operation's requirements.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A parameter outside a model's natural domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Data-dependent failures. These are not programming errors; they are what
// a sample can legitimately produce.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mean-map inversion failed: the target lies outside the range of eta.
class InversionError : public DataError {
 public:
  using DataError::DataError;
};

// A window without any arrivals (or departures) cannot identify the rate.
class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

// The simulator produced something impossible (nonpositive draw, runaway
// event count).
class SimulationFault : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace qlil
