#pragma once

#include <stdexcept>
#include <string>

namespace blpcs {

// Dimension or parameter contract violated by the caller.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed on-disk data (key, matrix, measurement or image files).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric guard tripped: exhaustive search too large, dense size limit, ...
struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace blpcs
