#pragma once

#include <stdexcept>
#include <string>

namespace kggraph {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain where the requested object exists
/// (e.g. the profile existence inequality fails).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must share a graph/grid do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure broke down (singular solve, NaN, no convergence).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A function was called on an object it is not defined for.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The requested dense computation exceeds the configured size cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace kggraph
