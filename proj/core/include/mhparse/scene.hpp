#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mhparse/tensor.hpp"

namespace mhparse {

// Semantic category ids. Background is 0; the 18 part categories follow in
// their canonical order so annotations are stable across runs and tools.
enum : int {
  kBackground = 0,
  kHat = 1,
  kHair = 2,
  kSunGlasses = 3,
  kUpperClothes = 4,
  kSkirt = 5,
  kPants = 6,
  kDress = 7,
  kBelt = 8,
  kLeftShoe = 9,
  kRightShoe = 10,
  kFace = 11,
  kLeftLeg = 12,
  kRightLeg = 13,
  kLeftArm = 14,
  kRightArm = 15,
  kBag = 16,
  kScarf = 17,
  kTorsoSkin = 18,
};

inline constexpr int kNumCategories = 19;  // 18 parts + background

const std::array<std::string, kNumCategories>& category_names();

// Base display/synthesis color per category, RGB in [0,1].
const std::array<std::array<double, 3>, kNumCategories>& category_palette();

struct SceneConfig {
  int height = 64;
  int width = 64;
  int min_persons = 2;
  int max_persons = 16;
  std::uint64_t seed = 0;
  int superpixel_target_size = 64;
  // Fraction by which neighboring person boxes overlap horizontally.
  double overlap = 0.35;

  void validate() const;
};

// Instance-aware ground truth for one synthetic image.
struct LabeledScene {
  Tensor image;                      // H x W x 3 in [0,1], quantized to 1/255 steps
  std::vector<Tensor> person_masks;  // person_count binary H x W masks, pairwise disjoint
  Tensor part_labels;                // H x W category ids in [0, 19)
  int person_count = 0;

  int height() const { return image.extent(0); }
  int width() const { return image.extent(1); }

  // Throws contract_error when any LabeledScene invariant fails.
  void validate() const;
};

// Deterministic procedural scene: layered part-assembly persons drawn over a
// plain background, person count geometric-ish so the mean sits near 3.
LabeledScene generate_scene(const SceneConfig& config);

}  // namespace mhparse
