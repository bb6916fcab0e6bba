#include "mhparse/parsernet.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "mhparse/rng.hpp"

namespace mhparse {

using nlohmann::json;

void ModelConfig::validate() const {
  if (trunk_width < 1 || feature_channels < 1) throw argument_error("channel counts must be positive");
  if (downscale != 2 && downscale != 4 && downscale != 8) throw argument_error("downscale must be 2, 4 or 8");
  if (theta <= 0.0) throw argument_error("theta must be positive");
  if (learning_rate <= 0.0) throw argument_error("learning rate must be positive");
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = values.find(name);
  if (it == values.end()) throw argument_error("unknown parameter " + name);
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw argument_error("unknown parameter " + name);
  return it->second;
}

void ParamStore::save(const std::string& path) const {
  json doc;
  for (const auto& [name, t] : values) {
    json entry;
    entry["shape"] = t.shape();
    entry["data"] = std::vector<double>(t.data(), t.data() + t.size());
    doc[name] = std::move(entry);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot open " + path + " for writing");
  out << doc.dump() << '\n';
  if (!out) throw parse_error("short write to " + path);
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open checkpoint " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
  ParamStore store;
  try {
    for (const auto& [name, entry] : doc.items()) {
      const auto shape = entry.at("shape").get<std::vector<int>>();
      auto data = entry.at("data").get<std::vector<double>>();
      store.values.emplace(name, Tensor(shape, std::move(data)));
    }
  } catch (const json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
  return store;
}

namespace {

Tensor gaussian_init(std::vector<int> shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t[i] = rng.normal() * stddev;
  return t;
}

int stride_of_layer(int layer, int downscale) {
  const int stride2_layers = downscale == 2 ? 1 : (downscale == 4 ? 2 : 3);
  return layer < stride2_layers ? 2 : 1;
}

}  // namespace

ParamStore init_parsernet(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ParamStore p;
  const int t = cfg.trunk_width;
  int cin = 3;
  for (int layer = 1; layer <= 3; ++layer) {
    const double std = std::sqrt(2.0 / (5.0 * 5.0 * cin));
    p.values.emplace("trunk.conv" + std::to_string(layer) + ".w", gaussian_init({5, 5, cin, t}, std, rng));
    p.values.emplace("trunk.conv" + std::to_string(layer) + ".b", Tensor({t}));
    cin = t;
  }
  p.values.emplace("seg.w", gaussian_init({1, 1, t, kNumCategories}, std::sqrt(2.0 / t), rng));
  p.values.emplace("seg.b", Tensor({kNumCategories}));
  p.values.emplace("aff.w", gaussian_init({1, 1, t, cfg.feature_channels}, std::sqrt(2.0 / t), rng));
  p.values.emplace("aff.b", Tensor({cfg.feature_channels}));
  p.values.emplace("count.w", gaussian_init({t, 1}, std::sqrt(1.0 / t), rng));
  p.values.emplace("count.b", Tensor({1}));
  return p;
}

ForwardVals forward_on_tape(ad::Tape& tape, const ParamStore& params, const Tensor& image,
                            const ModelConfig& cfg, bool with_grad) {
  cfg.validate();
  if (image.rank() != 3 || image.extent(2) != 3) throw argument_error("image must be H x W x 3");
  const int h = image.extent(0), w = image.extent(1);
  if (h % cfg.downscale != 0 || w % cfg.downscale != 0)
    throw argument_error("image dims must be divisible by downscale " + std::to_string(cfg.downscale));

  auto leaf = [&](const std::string& name) {
    return with_grad ? tape.param(name, params.at(name)) : tape.input(params.at(name));
  };

  ad::Val x = tape.input(image);
  for (int layer = 1; layer <= 3; ++layer) {
    const std::string base = "trunk.conv" + std::to_string(layer);
    x = tape.relu(tape.conv2d(x, leaf(base + ".w"), leaf(base + ".b"), stride_of_layer(layer - 1, cfg.downscale), 2));
  }

  ForwardVals out;
  out.out_h = h / cfg.downscale;
  out.out_w = w / cfg.downscale;

  ad::Val seg = tape.conv2d(x, leaf("seg.w"), leaf("seg.b"), 1, 0);
  out.logits_rows = tape.reshape(seg, {out.out_h * out.out_w, kNumCategories});
  out.probs_rows = tape.softmax_rows(out.logits_rows);

  ad::Val aff = tape.conv2d(x, leaf("aff.w"), leaf("aff.b"), 1, 0);
  out.feature_rows = tape.reshape(aff, {out.out_h * out.out_w, cfg.feature_channels});

  ad::Val pooled = tape.global_avg_pool(x);
  out.count = tape.add_rowvec(tape.matmul(pooled, leaf("count.w")), leaf("count.b"));
  return out;
}

ForwardResult forward(const ParamStore& params, const Tensor& image, const ModelConfig& cfg) {
  ad::Tape tape;
  const ForwardVals vals = forward_on_tape(tape, params, image, cfg, false);

  ForwardResult r;
  const Tensor& logits = tape.val(vals.logits_rows);
  const Tensor& probs = tape.val(vals.probs_rows);
  r.parsing.logits = Tensor({vals.out_h, vals.out_w, kNumCategories});
  r.parsing.probabilities = Tensor({vals.out_h, vals.out_w, kNumCategories});
  for (int i = 0; i < logits.size(); ++i) {
    r.parsing.logits[i] = logits[i];
    r.parsing.probabilities[i] = probs[i];
  }
  const Tensor& feats = tape.val(vals.feature_rows);
  r.features = Tensor({vals.out_h, vals.out_w, cfg.feature_channels});
  for (int i = 0; i < feats.size(); ++i) r.features[i] = feats[i];
  r.count_pred = tape.val(vals.count)[0];

  require_finite(r.parsing.logits, "parsing logits");
  require_finite(r.features, "affinity features");
  if (!std::isfinite(r.count_pred)) throw contract_error("count prediction is non-finite");
  return r;
}

Tensor ParsingMap::argmax() const {
  const int h = height(), w = width();
  Tensor out({h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int best = 0;
      double bv = probabilities.at(y, x, 0);
      for (int c = 1; c < kNumCategories; ++c)
        if (probabilities.at(y, x, c) > bv) {
          bv = probabilities.at(y, x, c);
          best = c;
        }
      out.at(y, x) = best;
    }
  return out;
}

Tensor ParsingMap::foreground_probability(int out_h, int out_w) const {
  Tensor q({height(), width()});
  for (int y = 0; y < height(); ++y)
    for (int x = 0; x < width(); ++x) q.at(y, x) = 1.0 - probabilities.at(y, x, kBackground);
  return bilinear_upsample(q, out_h, out_w);
}

double seg_loss(const ParsingMap& parsing, const Tensor& gt_ids) {
  const int h = parsing.height(), w = parsing.width();
  if (gt_ids.extent(0) != h || gt_ids.extent(1) != w) throw argument_error("seg_loss dims mismatch");
  double loss = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int target = static_cast<int>(gt_ids.at(y, x));
      if (target < 0 || target >= kNumCategories) throw argument_error("seg_loss target out of range");
      loss -= std::log(std::max(parsing.probabilities.at(y, x, target), 1e-300));
    }
  return loss / (h * w);
}

double count_loss(double count_pred, int person_count) {
  if (person_count < 1) throw argument_error("person count must be >= 1");
  const double d = count_pred - person_count;
  return d * d;
}

Tensor downsample_labels_majority(const Tensor& labels, int factor) {
  const int h = labels.extent(0), w = labels.extent(1);
  if (h % factor != 0 || w % factor != 0) throw argument_error("label dims not divisible by factor");
  const int oh = h / factor, ow = w / factor;
  int max_id = 0;
  for (int k = 0; k < labels.size(); ++k) max_id = std::max(max_id, static_cast<int>(labels[k]));
  Tensor out({oh, ow});
  std::vector<int> counts(static_cast<std::size_t>(max_id) + 1);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx)
          ++counts[static_cast<std::size_t>(labels.at(oy * factor + dy, ox * factor + dx))];
      out.at(oy, ox) = majority_vote(counts);
    }
  return out;
}

void SgdOptimizer::step(ParamStore& params, const std::map<std::string, Tensor>& grads) {
  for (const auto& [name, grad] : grads) {
    Tensor& p = params.at(name);
    if (!p.same_shape(grad)) throw argument_error("gradient shape mismatch for " + name);
    require_finite(grad, "gradient " + name);
    auto [it, inserted] = velocity_.try_emplace(name, Tensor(p.shape()));
    Tensor& v = it->second;
    for (int i = 0; i < p.size(); ++i) {
      v[i] = momentum_ * v[i] - lr_ * grad[i];
      p[i] += v[i];
    }
  }
}

}  // namespace mhparse
