#pragma once

#include <vector>

#include "mhparse/scene.hpp"
#include "mhparse/tensor.hpp"

namespace mhparse {

// Pixel -> superpixel-id partition. Ids are contiguous in [0, count) and
// every superpixel is 4-connected.
struct SuperpixelMap {
  Tensor assignment;  // H x W of ids
  int count = 0;

  int id_at(int y, int x) const { return static_cast<int>(assignment.at(y, x)); }

  // Pixel linear indices per superpixel, row-major at full resolution.
  std::vector<std::vector<int>> pixel_lists() const;

  // Nearest-neighbor resample of the id map to a coarser grid. Pixel lists
  // index into the coarse grid. Throws resolution_error when a superpixel
  // has no surviving pixel.
  std::vector<std::vector<int>> pixel_lists_at(int out_h, int out_w) const;

  // 4-neighborhood adjacency between superpixels.
  std::vector<std::vector<int>> adjacency() const;

  void validate() const;
};

// Grid-seeded local clustering on (color, position): a simplified SLIC.
// Deterministic; no RNG involved. compactness weighs the spatial term
// against the color term (lower = follow color boundaries more).
SuperpixelMap make_superpixels(const Tensor& image, int target_size, double compactness = 0.12);

inline SuperpixelMap make_superpixels(const LabeledScene& scene, int target_size,
                                      double compactness = 0.12) {
  return make_superpixels(scene.image, target_size, compactness);
}

}  // namespace mhparse
