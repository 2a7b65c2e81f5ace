#pragma once

#include <stdexcept>

namespace wvm {

// Malformed input file (bad header, ragged row, non-numeric cell).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid input that the method cannot run on
// (fewer than two environments, an environment with fewer than two rows).
struct DegenerateDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values encountered during optimization or quadrature.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad flag combination or an out-of-contract argument at the tool boundary.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wvm
