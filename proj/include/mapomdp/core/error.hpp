#pragma once

#include <stdexcept>
#include <string>

namespace mapomdp {

// Observation has zero likelihood under (belief, control).
class ImpossibleObservation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An enumeration or flattening would exceed its configured size cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleControl : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mapomdp
