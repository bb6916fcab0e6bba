#pragma once

#include <vector>

#include "mhparse/scene.hpp"
#include "mhparse/superpixels.hpp"
#include "mhparse/tensor.hpp"

namespace mhparse {

// Per-pixel person-id map; 0 marks background.
struct AccordanceMap {
  Tensor values;  // H x W of ids in {0..P}
};

// Pairwise superpixel affinities plus the foreground indicator. Ground-truth
// graphs are binary; predicted graphs carry Gaussian-kernel values in (0,1].
struct AffinityGraph {
  enum class Kind { ground_truth, predicted };
  Tensor affinity;               // N x N, symmetric
  std::vector<bool> foreground;  // per node
  Kind kind = Kind::ground_truth;

  int size() const { return affinity.extent(0); }

  // Mask keeping only entries whose endpoints are both foreground.
  Tensor foreground_mask() const;

  void validate() const;
};

// Majority vote over integer values with the tie rule used throughout:
// background (0) loses ties to any positive id, and the smallest positive id
// wins ties among positives. values holds counts indexed by id.
int majority_vote(const std::vector<int>& counts);

AccordanceMap accordance_map(const LabeledScene& scene);

// Majority person id per superpixel (the sigma_gt of the rule-based mapping).
std::vector<int> superpixel_majority(const AccordanceMap& m, const SuperpixelMap& sp);

// Binary graph: nodes connect iff they share a positive majority id.
AffinityGraph gt_affinity(const std::vector<int>& sigma_gt, int n);

// Gaussian-kernel graph over per-superpixel mean features. features is
// Hf x Wf x C at the (possibly reduced) feature resolution; the superpixel
// map is resampled to that grid by nearest neighbor.
AffinityGraph predicted_affinity(const Tensor& features, const SuperpixelMap& sp, double theta);

// Same kernel on already-pooled per-superpixel features (N x C).
AffinityGraph predicted_affinity_from_pooled(const Tensor& pooled, double theta);

}  // namespace mhparse
