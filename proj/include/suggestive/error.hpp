#pragma once

#include <stdexcept>
#include <string>

namespace suggestive {

// Input violates a documented precondition or type invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Filesystem failure (open, read, write, rename).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace suggestive
