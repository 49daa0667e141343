#pragma once

#include <stdexcept>
#include <string>

namespace celab {

// Malformed input: wrong shape, probabilities that do not sum to one,
// parameters outside the supported range.
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Well-formed input for which the requested quantity does not exist,
// e.g. a target entropy that no distribution can reach.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A precondition of a reduction is not met by the supplied instance.
class hypothesis_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace celab
