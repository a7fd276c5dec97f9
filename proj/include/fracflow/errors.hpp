#pragma once
#include <stdexcept>
#include <string>

namespace fracflow {

// Thrown when an input violates a documented precondition (bad order, bad
// index, malformed config). CLI maps this to exit code 2.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a computation degenerates numerically (singular metric block,
// NaN state, drift beyond tolerance). CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a file cannot be read/written or fails to parse structurally.
// CLI maps this to exit code 4.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown by the formal integral when the argument is not a total derivative.
struct not_exact_error : std::domain_error {
    using std::domain_error::domain_error;
};

}  // namespace fracflow
