#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mhparse/tensor.hpp"

namespace mhparse::ad {

// Handle into a Tape. Only valid for the tape that produced it.
struct Val {
  int id = -1;
};

// Reverse-mode tape over the fixed operator set used by the training
// objectives: matmul, elementwise arithmetic, exp/log/tanh/relu/sigmoid,
// softmax, convolution (as strided patch matmul), pooling (global average
// and superpixel mean), the Gaussian affinity kernel, and the normalized
// adjacency transform. A tape is built per forward pass and discarded.
class Tape {
 public:
  // Leaf that does not receive gradients.
  Val input(Tensor v);
  // Named leaf that accumulates gradients; name keys the result of
  // param_grads() after backward().
  Val param(const std::string& name, Tensor v);

  Val add(Val a, Val b);
  Val sub(Val a, Val b);
  Val mul(Val a, Val b);
  Val scale(Val a, double s);
  // m (R x C) plus row-broadcast bias (C).
  Val add_rowvec(Val m, Val bias);
  Val matmul(Val a, Val b);
  Val transpose2(Val a);
  Val reshape(Val a, std::vector<int> shape);

  Val vexp(Val a);
  Val vlog(Val a);
  Val vtanh(Val a);
  Val relu(Val a);
  Val sigmoid(Val a);
  Val clamp(Val a, double lo, double hi);

  // Row-wise softmax of an R x C tensor.
  Val softmax_rows(Val a);
  // Softmax over all entries (used for attention weights over nodes).
  Val softmax_all(Val a);

  Val sum(Val a);
  Val mean(Val a);
  // Elementwise product with a constant tensor (masking).
  Val mul_const(Val a, Tensor c);

  // x: H x W x Cin, w: Kh x Kw x Cin x Cout, bias: Cout.
  Val conv2d(Val x, Val w, Val bias, int stride, int pad);

  // H x W x C -> 1 x C.
  Val global_avg_pool(Val x);

  // rows: R x C with a pixel-index list per superpixel -> N x C means.
  Val superpixel_pool(Val rows, std::shared_ptr<const std::vector<std::vector<int>>> pixels);

  // pooled: N x C -> N x N, out(i,j) = exp(-||p_i - p_j||^2 / (2 theta^2)).
  Val gaussian_affinity(Val pooled, double theta);

  // A -> D^(-1/2) (A + I) D^(-1/2) with D the degree matrix of A + I.
  Val normalize_adjacency(Val a);

  // Mean over rows of -log softmax(logits)[target]; numerically fused.
  Val cross_entropy_mean(Val logits, std::shared_ptr<const std::vector<int>> targets);

  const Tensor& val(Val v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  const Tensor& grad(Val v) const { return nodes_[static_cast<std::size_t>(v.id)].grad; }

  // Seeds d(loss)/d(loss) = 1 and propagates. loss must be a scalar node.
  void backward(Val loss);

  // Gradients of all named params, keyed by name. Valid after backward().
  std::map<std::string, Tensor> param_grads() const;

  int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    std::function<void(Tape&)> back;
  };

  Val make(Tensor value, bool needs_grad, std::function<void(Tape&)> back);
  Node& node(Val v) { return nodes_[static_cast<std::size_t>(v.id)]; }
  Tensor& g(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  const Tensor& v(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool ng(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  std::vector<Node> nodes_;
  std::map<std::string, int> params_;
};

}  // namespace mhparse::ad
