#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace soficlab {

// Base class for all library errors so callers can catch one type when
// recording soft per-row failures in sweeps.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Two operands live on different carriers.
struct CarrierMismatch : Error {
  explicit CarrierMismatch(const std::string& what) : Error(what) {}
};

// Orthogonal sum parts overlap; indices identify the first violating pair.
struct OverlapError : Error {
  OverlapError(const std::string& what, std::size_t first, std::size_t second)
      : Error(what), first_index(first), second_index(second) {}
  std::size_t first_index;
  std::size_t second_index;
};

// An enumeration or search would exceed its configured cap.
struct CapExceeded : Error {
  explicit CapExceeded(const std::string& what) : Error(what) {}
};

// No embedding can exist because d * trace is not integral for some minimal
// projection; required_divisor is the least d that would work.
struct DivisibilityError : Error {
  DivisibilityError(const std::string& what, long divisor)
      : Error(what), required_divisor(divisor) {}
  long required_divisor;
};

// Structural validation failures (partitions, weights, generator graphs...).
struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(what) {}
};

// A class partition does not cover every point exactly once.
struct BadPartition : ValidationError {
  explicit BadPartition(const std::string& what) : ValidationError(what) {}
};

// Points within one class carry different weights.
struct UnequalClassWeights : ValidationError {
  explicit UnequalClassWeights(const std::string& what) : ValidationError(what) {}
};

// Malformed presentation file; message carries location context.
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace soficlab
