#pragma once

#include <stdexcept>
#include <string>

namespace mhparse {

// Base class for all library errors.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller passed an argument outside the documented domain (k > N, bad dims, ...).
struct argument_error : error {
  explicit argument_error(const std::string& msg) : error(msg) {}
};

// A documented precondition or invariant does not hold on the data itself
// (non-symmetric matrix, overlapping person masks, ...).
struct contract_error : error {
  explicit contract_error(const std::string& msg) : error(msg) {}
};

// Malformed on-disk data. Message carries the path and, where known,
// a line/offset diagnostic.
struct parse_error : error {
  explicit parse_error(const std::string& msg) : error(msg) {}
};

// Scene synthesis could not satisfy the requested configuration.
struct generation_error : error {
  explicit generation_error(const std::string& msg) : error(msg) {}
};

// A superpixel vanished when resampled to a coarser grid.
struct resolution_error : error {
  explicit resolution_error(const std::string& msg) : error(msg) {}
};

// A function under numeric evaluation produced a non-finite value.
struct evaluation_error : error {
  explicit evaluation_error(const std::string& msg) : error(msg) {}
};

}  // namespace mhparse
