#pragma once

#include <stdexcept>
#include <string>

namespace mixad {

// Validation failures: bad shapes, bad arguments, malformed files.
// The CLI maps these to exit code 1.
class ValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public ValueError {
 public:
  using ValueError::ValueError;
};

class IoError : public ValueError {
 public:
  using ValueError::ValueError;
};

// Numeric breakdown: non-finite values, diverging training.
// The CLI maps these to exit code 2.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixad
