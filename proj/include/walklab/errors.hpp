#pragma once

#include <stdexcept>
#include <string>

namespace walklab {

// Bad inputs: dimension mismatches, invalid probabilities, malformed configs.
// The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A requested computation exceeds a documented enumeration/support cap.
// The CLI maps this to exit code 3.
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An internal cross-check failed (residuals, bound ordering, mass budgets).
// These indicate a bug, not bad input.  The CLI maps this to exit code 4.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace walklab
