#include "mhparse/scene.hpp"

#include <algorithm>
#include <cmath>

#include "mhparse/rng.hpp"

namespace mhparse {

const std::array<std::string, kNumCategories>& category_names() {
  static const std::array<std::string, kNumCategories> names = {
      "background", "hat",       "hair",     "sun glasses", "upper clothes",
      "skirt",      "pants",     "dress",    "belt",        "left shoe",
      "right shoe", "face",      "left leg", "right leg",   "left arm",
      "right arm",  "bag",       "scarf",    "torso skin"};
  return names;
}

const std::array<std::array<double, 3>, kNumCategories>& category_palette() {
  static const std::array<std::array<double, 3>, kNumCategories> palette = {{
      {0.82, 0.83, 0.85},  // background
      {0.60, 0.10, 0.10},  // hat
      {0.30, 0.18, 0.08},  // hair
      {0.05, 0.05, 0.10},  // sun glasses
      {0.15, 0.35, 0.70},  // upper clothes
      {0.75, 0.20, 0.60},  // skirt
      {0.12, 0.15, 0.40},  // pants
      {0.50, 0.15, 0.70},  // dress
      {0.55, 0.35, 0.08},  // belt
      {0.15, 0.15, 0.15},  // left shoe
      {0.35, 0.25, 0.15},  // right shoe
      {0.95, 0.75, 0.60},  // face
      {0.90, 0.55, 0.35},  // left leg
      {0.70, 0.45, 0.30},  // right leg
      {0.95, 0.60, 0.45},  // left arm
      {0.75, 0.50, 0.40},  // right arm
      {0.55, 0.55, 0.12},  // bag
      {0.90, 0.35, 0.10},  // scarf
      {0.98, 0.80, 0.70},  // torso skin
  }};
  return palette;
}

void SceneConfig::validate() const {
  if (height < 32 || width < 32) throw argument_error("scene dims must be >= 32");
  if (min_persons < 2 || min_persons > max_persons || max_persons > 16)
    throw argument_error("person counts must satisfy 2 <= min <= max <= 16");
  if (superpixel_target_size < 4) throw argument_error("superpixel_target_size must be >= 4");
  if (overlap < 0.0 || overlap > 0.6) throw argument_error("overlap must lie in [0, 0.6]");
}

void LabeledScene::validate() const {
  const int h = height(), w = width();
  if (person_count < 1) throw contract_error("scene must contain at least one person");
  if (static_cast<int>(person_masks.size()) != person_count)
    throw contract_error("person mask count does not match person_count");
  if (part_labels.extent(0) != h || part_labels.extent(1) != w)
    throw contract_error("part_labels dims do not match image");
  if (!image.all_finite()) throw contract_error("image contains non-finite values");
  for (const Tensor& m : person_masks)
    if (m.extent(0) != h || m.extent(1) != w) throw contract_error("person mask dims mismatch");
  for (int k = 0; k < h * w; ++k) {
    int covered = 0;
    for (const Tensor& m : person_masks) {
      const double v = m[k];
      if (v != 0.0 && v != 1.0) throw contract_error("person mask not binary");
      covered += static_cast<int>(v);
    }
    if (covered > 1) throw contract_error("person masks overlap at pixel " + std::to_string(k));
    const double lbl = part_labels[k];
    if (lbl < 0 || lbl >= kNumCategories || lbl != std::floor(lbl))
      throw contract_error("part label out of range at pixel " + std::to_string(k));
    if ((lbl > 0) != (covered == 1))
      throw contract_error("part label / person mask inconsistency at pixel " + std::to_string(k));
  }
}

namespace {

struct PartShape {
  int category;
  double x0, x1, y0, y1;  // fractions of the person box
  bool ellipse = false;
};

struct PersonSpec {
  double cx;      // center x in pixels
  double base_y;  // feet line in pixels
  double ph, pw;  // box height/width in pixels
  std::vector<PartShape> parts;
  std::array<double, 3> tint;
};

std::vector<PartShape> sample_parts(Rng& rng) {
  std::vector<PartShape> parts;
  const bool has_hat = rng.bernoulli(0.5);
  const bool has_glasses = rng.bernoulli(0.3);
  const bool has_scarf = rng.bernoulli(0.25);
  const bool has_bag = rng.bernoulli(0.25);
  const double outfit = rng.next_double();  // <0.45 pants, <0.75 skirt, else dress
  const bool has_belt = outfit < 0.75 && rng.bernoulli(0.6);

  // Draw order is z-order within the person: torso and limbs first, head
  // gear last, so occlusion between a person's own parts is consistent.
  parts.push_back({kLeftArm, 0.12, 0.27, 0.26, 0.54});
  parts.push_back({kRightArm, 0.73, 0.88, 0.26, 0.54});
  if (outfit < 0.45) {
    parts.push_back({kUpperClothes, 0.28, 0.72, 0.24, 0.58});
    parts.push_back({kPants, 0.30, 0.48, 0.58, 0.88});
    parts.push_back({kPants, 0.52, 0.70, 0.58, 0.88});
  } else if (outfit < 0.75) {
    parts.push_back({kUpperClothes, 0.28, 0.72, 0.24, 0.58});
    parts.push_back({kSkirt, 0.24, 0.76, 0.56, 0.72});
    parts.push_back({kLeftLeg, 0.32, 0.46, 0.72, 0.88});
    parts.push_back({kRightLeg, 0.54, 0.68, 0.72, 0.88});
  } else {
    parts.push_back({kDress, 0.26, 0.74, 0.24, 0.74});
    parts.push_back({kLeftLeg, 0.32, 0.46, 0.74, 0.88});
    parts.push_back({kRightLeg, 0.54, 0.68, 0.74, 0.88});
  }
  parts.push_back({kTorsoSkin, 0.44, 0.56, 0.24, 0.29});
  if (has_belt) parts.push_back({kBelt, 0.28, 0.72, 0.56, 0.60});
  parts.push_back({kLeftShoe, 0.28, 0.48, 0.88, 0.95});
  parts.push_back({kRightShoe, 0.52, 0.72, 0.88, 0.95});
  if (has_bag) parts.push_back({kBag, 0.78, 0.97, 0.44, 0.62});
  parts.push_back({kHair, 0.26, 0.74, 0.02, 0.13, true});
  parts.push_back({kFace, 0.30, 0.70, 0.07, 0.22, true});
  if (has_glasses) parts.push_back({kSunGlasses, 0.32, 0.68, 0.11, 0.145});
  if (has_scarf) parts.push_back({kScarf, 0.34, 0.66, 0.215, 0.26});
  if (has_hat) parts.push_back({kHat, 0.24, 0.76, 0.00, 0.065});
  return parts;
}

// Truncated geometric count with ratio 1/2: mean sits near min+1, matching
// the target average of 3 persons for the default [2,16] range.
int sample_person_count(Rng& rng, int lo, int hi) {
  int n = lo;
  while (n < hi && rng.bernoulli(0.5)) ++n;
  return n;
}

double quantize255(double v) {
  const int q = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  return q / 255.0;
}

}  // namespace

LabeledScene generate_scene(const SceneConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int h = config.height, w = config.width;

  for (int attempt = 0; attempt < 10; ++attempt) {
    const int target_count = sample_person_count(rng, config.min_persons, config.max_persons);

    std::vector<PersonSpec> persons;
    double next_cx = -1.0;
    for (int i = 0; i < target_count; ++i) {
      PersonSpec p;
      const double scale = rng.uniform(0.45, 0.70);
      p.ph = scale * h;
      p.pw = 0.42 * p.ph;
      p.base_y = rng.uniform(0.90, 0.99) * h;
      if (next_cx < 0.0) {
        p.cx = p.pw * 0.5 * rng.uniform(1.0, 1.4);
      } else {
        const double step = p.pw * (1.0 - config.overlap) * rng.uniform(0.85, 1.25);
        p.cx = next_cx + step;
      }
      if (p.cx + 0.30 * p.pw > w) break;  // canvas full
      next_cx = p.cx;
      p.parts = sample_parts(rng);
      for (int c = 0; c < 3; ++c) p.tint[static_cast<std::size_t>(c)] = rng.uniform(-0.07, 0.07);
      persons.push_back(std::move(p));
    }

    // Painter's order: persons with lower feet lines are nearer the camera
    // and drawn last. Stable sort keeps equal rows deterministic.
    std::vector<int> order(persons.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return persons[static_cast<std::size_t>(a)].base_y < persons[static_cast<std::size_t>(b)].base_y;
    });

    Tensor owner({h, w});        // 0 = background, else temporary person index + 1
    Tensor labels({h, w});       // category ids
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
      const PersonSpec& p = persons[static_cast<std::size_t>(order[oi])];
      const double top = p.base_y - p.ph;
      const double left = p.cx - p.pw / 2.0;
      for (const PartShape& part : p.parts) {
        const int y0 = std::max(0, static_cast<int>(std::floor(top + part.y0 * p.ph)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(top + part.y1 * p.ph)));
        const int x0 = std::max(0, static_cast<int>(std::floor(left + part.x0 * p.pw)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(left + part.x1 * p.pw)));
        const double ecx = left + 0.5 * (part.x0 + part.x1) * p.pw;
        const double ecy = top + 0.5 * (part.y0 + part.y1) * p.ph;
        const double erx = std::max(0.5, 0.5 * (part.x1 - part.x0) * p.pw);
        const double ery = std::max(0.5, 0.5 * (part.y1 - part.y0) * p.ph);
        for (int y = y0; y <= y1; ++y)
          for (int x = x0; x <= x1; ++x) {
            if (part.ellipse) {
              const double dx = (x + 0.5 - ecx) / erx;
              const double dy = (y + 0.5 - ecy) / ery;
              if (dx * dx + dy * dy > 1.0) continue;
            }
            owner.at(y, x) = static_cast<double>(oi + 1);
            labels.at(y, x) = part.category;
          }
      }
    }

    // Drop persons that ended up (nearly) fully occluded, keep ids contiguous.
    std::vector<int> visible(persons.size(), 0);
    for (int k = 0; k < h * w; ++k)
      if (owner[k] > 0) ++visible[static_cast<std::size_t>(owner[k]) - 1];
    std::vector<int> remap(persons.size(), 0);
    int kept = 0;
    for (std::size_t i = 0; i < persons.size(); ++i)
      remap[i] = visible[i] >= 40 ? ++kept : 0;

    if (kept < config.min_persons) continue;  // repack with fresh draws

    LabeledScene scene;
    scene.person_count = kept;
    scene.part_labels = Tensor({h, w});
    scene.person_masks.assign(static_cast<std::size_t>(kept), Tensor({h, w}));
    scene.image = Tensor({h, w, 3});

    const auto& palette = category_palette();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int o = static_cast<int>(owner.at(y, x));
        const int id = o > 0 ? remap[static_cast<std::size_t>(o - 1)] : 0;
        const int cat = id > 0 ? static_cast<int>(labels.at(y, x)) : 0;
        scene.part_labels.at(y, x) = cat;
        if (id > 0) scene.person_masks[static_cast<std::size_t>(id - 1)].at(y, x) = 1.0;
        const auto& base = palette[static_cast<std::size_t>(cat)];
        for (int c = 0; c < 3; ++c) {
          double v = base[static_cast<std::size_t>(c)];
          if (id > 0) v += persons[static_cast<std::size_t>(o - 1)].tint[static_cast<std::size_t>(c)];
          v += rng.uniform(-0.01, 0.01);
          scene.image.at(y, x, c) = quantize255(v);
        }
      }

    scene.validate();
    return scene;
  }
  throw generation_error("could not place " + std::to_string(config.min_persons) +
                         " persons on a " + std::to_string(config.height) + "x" +
                         std::to_string(config.width) + " canvas");
}

}  // namespace mhparse
