#pragma once

#include <stdexcept>
#include <string>

namespace usc {

// Malformed input: unparsable JSON, bad rational, unknown symmetry.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structurally valid spec that fails one of the geometric checks.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested computation exceeds a size guard.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Resistance between sets in different components, or a solve that
// needs a connected graph.
class DisconnectedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace usc
