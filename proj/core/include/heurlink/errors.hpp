#pragma once

#include <stdexcept>

namespace heurlink {

// Raised when a verified contract does not hold (differ mismatch,
// tampered split file, checkpoint/graph mismatch). CLI exit code 2.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when numerics break down (non-finite loss or gradients).
// CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace heurlink
