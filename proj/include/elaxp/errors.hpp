#pragma once

#include <stdexcept>
#include <string>

namespace elaxp {

// Bad input to a public operation (maps to CLI exit code 2).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An object is not in a state that allows the requested operation.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace elaxp
