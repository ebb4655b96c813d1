#pragma once

#include <stdexcept>

namespace noisysq {

// Bad experiment/spec parameters supplied by a caller or config file.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by calling code.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// A learner exhausted its query budget.
struct LearnerFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The supplied magnitude bound C is inconsistent with what the oracle shows.
struct MagnitudeBoundViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerically degenerate noise (mean of 1-2*eta not positive).
struct DegenerateNoise : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace noisysq
