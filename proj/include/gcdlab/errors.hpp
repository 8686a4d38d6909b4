#pragma once

#include <stdexcept>
#include <string>

namespace gcdlab {

// Caller handed us something outside an operation's domain. The CLI maps
// this to exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An element whose valuation relative to the modulus leaves {-1, 0, 1}.
class InvalidDefect : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// A result that the mathematics says cannot happen. The CLI maps this to
// exit code 1.
class ConsistencyFailure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace gcdlab
