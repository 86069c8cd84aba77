#pragma once

#include <stdexcept>
#include <string>

namespace lowrl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite or otherwise malformed inputs.
struct InputError : Error {
  using Error::Error;
};

// Bad configuration: unknown env names, invalid schedules, config files.
struct ConfigError : Error {
  using Error::Error;
};

// Rank-1 anchor pivot below threshold; signals the V_min assumption failed.
struct SingularPivotError : Error {
  using Error::Error;
};

// Anchor block rank-deficient relative to the requested rank.
struct DegenerateAnchorError : Error {
  using Error::Error;
};

}  // namespace lowrl
