#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SpaceMismatch : Error {
  using Error::Error;
};

struct InsufficientResolution : Error {
  using Error::Error;
};

struct InvalidParameter : Error {
  using Error::Error;
};

struct DegenerateObservable : Error {
  using Error::Error;
};

struct TruncationInsufficient : Error {
  using Error::Error;
};

struct EmptyPartitionClass : Error {
  using Error::Error;
};

// A constructed kernel failed one of the two marginal conditions.
struct MarginalViolation : Error {
  using Error::Error;
};

// More than the allowed fraction of kernel entries had to be clamped
// away from a nonpositive value.
struct ExcessiveClamping : Error {
  using Error::Error;
};

struct NumericalUnderflow : Error {
  using Error::Error;
};

struct NoConsistentMeasure : Error {
  using Error::Error;
};

struct ResourceLimit : Error {
  using Error::Error;
};

struct GridUnsupported : Error {
  using Error::Error;
};

}  // namespace mfg
