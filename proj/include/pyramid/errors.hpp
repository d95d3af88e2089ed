#pragma once

#include <stdexcept>
#include <string>

namespace pyramid {

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a monotone counter (hash epoch, access counter) would wrap.
class CounterExhausted : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

class CapacityExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BuildFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pyramid
