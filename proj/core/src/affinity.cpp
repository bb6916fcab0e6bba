#include "mhparse/affinity.hpp"

#include <cmath>

namespace mhparse {

Tensor AffinityGraph::foreground_mask() const {
  const int n = size();
  Tensor mask({n, n});
  for (int i = 0; i < n; ++i) {
    if (!foreground[static_cast<std::size_t>(i)]) continue;
    for (int j = 0; j < n; ++j)
      if (foreground[static_cast<std::size_t>(j)]) mask.at(i, j) = 1.0;
  }
  return mask;
}

void AffinityGraph::validate() const {
  const int n = size();
  if (affinity.rank() != 2 || affinity.extent(1) != n) throw contract_error("affinity must be square");
  if (static_cast<int>(foreground.size()) != n) throw contract_error("foreground flag count mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = affinity.at(i, j);
      if (v != affinity.at(j, i)) throw contract_error("affinity not symmetric");
      if (v < 0.0 || v > 1.0) throw contract_error("affinity out of [0,1]");
      if (kind == Kind::ground_truth && v != 0.0 && v != 1.0)
        throw contract_error("ground-truth affinity must be binary");
    }
  if (kind == Kind::ground_truth)
    for (int i = 0; i < n; ++i)
      if (foreground[static_cast<std::size_t>(i)] && affinity.at(i, i) != 1.0)
        throw contract_error("foreground diagonal must be 1 in ground-truth graph");
}

int majority_vote(const std::vector<int>& counts) {
  int best_id = 0;
  int best_count = -1;
  for (std::size_t id = 1; id < counts.size(); ++id) {
    if (counts[id] > best_count) {
      best_count = counts[id];
      best_id = static_cast<int>(id);
    }
  }
  if (best_count <= 0) return 0;
  return counts[0] > best_count ? 0 : best_id;  // background loses ties
}

AccordanceMap accordance_map(const LabeledScene& scene) {
  const int h = scene.height(), w = scene.width();
  AccordanceMap m;
  m.values = Tensor({h, w});
  for (int i = 0; i < scene.person_count; ++i) {
    const Tensor& mask = scene.person_masks[static_cast<std::size_t>(i)];
    for (int k = 0; k < h * w; ++k)
      if (mask[k] != 0.0) m.values[k] = i + 1;
  }
  return m;
}

std::vector<int> superpixel_majority(const AccordanceMap& m, const SuperpixelMap& sp) {
  if (!m.values.same_shape(sp.assignment)) throw argument_error("accordance/superpixel dims mismatch");
  int max_id = 0;
  for (int k = 0; k < m.values.size(); ++k) max_id = std::max(max_id, static_cast<int>(m.values[k]));

  std::vector<std::vector<int>> counts(static_cast<std::size_t>(sp.count),
                                       std::vector<int>(static_cast<std::size_t>(max_id) + 1, 0));
  for (int k = 0; k < m.values.size(); ++k)
    ++counts[static_cast<std::size_t>(sp.assignment[k])][static_cast<std::size_t>(m.values[k])];

  std::vector<int> sigma(static_cast<std::size_t>(sp.count));
  for (int s = 0; s < sp.count; ++s) sigma[static_cast<std::size_t>(s)] = majority_vote(counts[static_cast<std::size_t>(s)]);
  return sigma;
}

AffinityGraph gt_affinity(const std::vector<int>& sigma_gt, int n) {
  if (static_cast<int>(sigma_gt.size()) != n) throw argument_error("sigma_gt length must equal node count");
  AffinityGraph g;
  g.kind = AffinityGraph::Kind::ground_truth;
  g.affinity = Tensor({n, n});
  g.foreground.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g.foreground[static_cast<std::size_t>(i)] = sigma_gt[static_cast<std::size_t>(i)] > 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.affinity.at(i, j) =
          (sigma_gt[static_cast<std::size_t>(i)] == sigma_gt[static_cast<std::size_t>(j)] && sigma_gt[static_cast<std::size_t>(i)] > 0)
              ? 1.0
              : 0.0;
  return g;
}

AffinityGraph predicted_affinity_from_pooled(const Tensor& pooled, double theta) {
  if (theta <= 0.0) throw argument_error("theta must be positive");
  const int n = pooled.extent(0), c = pooled.extent(1);
  AffinityGraph g;
  g.kind = AffinityGraph::Kind::predicted;
  g.affinity = Tensor({n, n});
  g.foreground.assign(static_cast<std::size_t>(n), true);  // caller overrides from parsing
  const double inv = 1.0 / (2.0 * theta * theta);
  for (int i = 0; i < n; ++i) {
    g.affinity.at(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (int ch = 0; ch < c; ++ch) {
        const double d = pooled.at(i, ch) - pooled.at(j, ch);
        d2 += d * d;
      }
      const double a = std::exp(-d2 * inv);
      g.affinity.at(i, j) = a;
      g.affinity.at(j, i) = a;
    }
  }
  return g;
}

AffinityGraph predicted_affinity(const Tensor& features, const SuperpixelMap& sp, double theta) {
  if (features.rank() != 3) throw argument_error("features must be Hf x Wf x C");
  const int hf = features.extent(0), wf = features.extent(1), c = features.extent(2);
  const auto lists = sp.pixel_lists_at(hf, wf);  // throws resolution_error on empty superpixel
  Tensor pooled({sp.count, c});
  for (int s = 0; s < sp.count; ++s) {
    const auto& px = lists[static_cast<std::size_t>(s)];
    for (int k : px) {
      const int y = k / wf, x = k % wf;
      for (int ch = 0; ch < c; ++ch) pooled.at(s, ch) += features.at(y, x, ch);
    }
    for (int ch = 0; ch < c; ++ch) pooled.at(s, ch) /= static_cast<double>(px.size());
  }
  return predicted_affinity_from_pooled(pooled, theta);
}

}  // namespace mhparse
