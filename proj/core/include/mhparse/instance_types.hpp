#pragma once

#include <vector>

#include "mhparse/tensor.hpp"

namespace mhparse {

// Final instance-aware parsing: who is where, wearing what, how sure.
struct InstanceParsing {
  Tensor instance_ids;              // H x W person ids, 0 = background
  Tensor categories;                // H x W semantic ids, 0 = background
  std::vector<double> confidences;  // one score in [0,1] per instance id 1..P

  int height() const { return instance_ids.extent(0); }
  int width() const { return instance_ids.extent(1); }
  int instance_count() const { return static_cast<int>(confidences.size()); }

  // instance_ids > 0 <=> categories > 0; ids contiguous; confidences in range.
  void validate() const;
};

}  // namespace mhparse
