#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mhparse/autodiff.hpp"
#include "mhparse/scene.hpp"
#include "mhparse/tensor.hpp"

namespace mhparse {

struct ModelConfig {
  int trunk_width = 16;
  int feature_channels = 8;  // C_F of the affinity head
  int downscale = 4;         // spatial reduction of both heads (2, 4 or 8)
  double theta = 1.0;        // Gaussian affinity bandwidth
  double learning_rate = 0.05;
  double momentum = 0.9;

  void validate() const;
};

// Named learnable tensors. One store holds the whole generator (trunk plus
// the three heads); the discriminator keeps its own.
struct ParamStore {
  std::map<std::string, Tensor> values;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return values.count(name) != 0; }

  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);
};

// Gaussian-initialized generator parameters (fan-in scaled).
ParamStore init_parsernet(const ModelConfig& cfg, std::uint64_t seed);

// Instance-agnostic parsing output at reduced resolution.
struct ParsingMap {
  Tensor logits;         // H' x W' x C
  Tensor probabilities;  // H' x W' x C, rows sum to 1

  int height() const { return logits.extent(0); }
  int width() const { return logits.extent(1); }

  // Per-pixel argmax category at parsing resolution.
  Tensor argmax() const;
  // Foreground probability Q = 1 - p(background), upsampled bilinearly.
  Tensor foreground_probability(int out_h, int out_w) const;
};

struct ForwardResult {
  ParsingMap parsing;
  Tensor features;  // H'' x W'' x C_F
  double count_pred = 0.0;
};

// Tape handles of one generator forward pass, for building training losses.
struct ForwardVals {
  ad::Val logits_rows;   // (H'W') x C
  ad::Val probs_rows;    // (H'W') x C
  ad::Val feature_rows;  // (H''W'') x C_F
  ad::Val count;         // 1 x 1
  int out_h = 0, out_w = 0;
};

// Runs the trunk and all three heads on the tape. with_grad selects whether
// parameters are registered as differentiable leaves.
ForwardVals forward_on_tape(ad::Tape& tape, const ParamStore& params, const Tensor& image,
                            const ModelConfig& cfg, bool with_grad);

// Value-level forward pass (inference path).
ForwardResult forward(const ParamStore& params, const Tensor& image, const ModelConfig& cfg);

// Mean pixel-wise cross-entropy against category ids at parsing resolution.
double seg_loss(const ParsingMap& parsing, const Tensor& gt_ids);

// Squared error between predicted and true person count.
double count_loss(double count_pred, int person_count);

// Majority-vote downsample of a label map by an integer factor, with the
// same tie rule as the superpixel majority (background loses, low id wins).
Tensor downsample_labels_majority(const Tensor& labels, int factor);

// SGD with momentum; velocity buffers keyed like the parameters.
class SgdOptimizer {
 public:
  SgdOptimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void step(ParamStore& params, const std::map<std::string, Tensor>& grads);

 private:
  double lr_, momentum_;
  std::map<std::string, Tensor> velocity_;
};

}  // namespace mhparse
