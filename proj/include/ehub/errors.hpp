#pragma once

#include <stdexcept>
#include <string>

namespace ehub {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, bad scenario field, broken invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A subproblem had no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A topology event or fixed trade obligation cannot be honoured.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent message between coordinators.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// File system failure while reading or writing results.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ehub
