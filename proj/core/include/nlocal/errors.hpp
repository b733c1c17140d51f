#pragma once

#include <stdexcept>
#include <string>

namespace nlocal {

// Subset contains an index outside [0, n), a duplicate, or is empty.
class InvalidSubsetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parameter value outside the range an operation supports.
class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class EigensolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested regime is outside the assumptions of an analytic formula.
class UnsupportedRegimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoIntersectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegratorAccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SerializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlocal
