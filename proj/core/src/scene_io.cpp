#include "mhparse/scene_io.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace mhparse {

using nlohmann::json;

namespace {

json rle_binary_rows(const Tensor& mask) {
  const int h = mask.extent(0), w = mask.extent(1);
  json rows = json::array();
  for (int y = 0; y < h; ++y) {
    json runs = json::array();
    int x = 0;
    while (x < w) {
      if (mask.at(y, x) != 0.0) {
        const int start = x;
        while (x < w && mask.at(y, x) != 0.0) ++x;
        runs.push_back(json::array({start, x - start}));
      } else {
        ++x;
      }
    }
    rows.push_back(std::move(runs));
  }
  return rows;
}

Tensor decode_binary_rows(const json& rows, int h, int w, const std::string& what) {
  Tensor mask({h, w});
  if (static_cast<int>(rows.size()) != h) throw parse_error(what + ": row count mismatch");
  for (int y = 0; y < h; ++y) {
    for (const auto& run : rows[static_cast<std::size_t>(y)]) {
      if (!run.is_array() || run.size() != 2) throw parse_error(what + ": run must be [start,len]");
      const int start = run[0].get<int>(), len = run[1].get<int>();
      if (start < 0 || len <= 0 || start + len > w)
        throw parse_error(what + ": run [" + std::to_string(start) + "," + std::to_string(len) +
                          "] escapes row " + std::to_string(y));
      for (int x = start; x < start + len; ++x) mask.at(y, x) = 1.0;
    }
  }
  return mask;
}

json rle_value_rows(const Tensor& labels) {
  const int h = labels.extent(0), w = labels.extent(1);
  json rows = json::array();
  for (int y = 0; y < h; ++y) {
    json runs = json::array();
    int x = 0;
    while (x < w) {
      const int v = static_cast<int>(labels.at(y, x));
      const int start = x;
      while (x < w && static_cast<int>(labels.at(y, x)) == v) ++x;
      runs.push_back(json::array({v, x - start}));
    }
    rows.push_back(std::move(runs));
  }
  return rows;
}

Tensor decode_value_rows(const json& rows, int h, int w, int max_value, const std::string& what) {
  Tensor labels({h, w});
  if (static_cast<int>(rows.size()) != h) throw parse_error(what + ": row count mismatch");
  for (int y = 0; y < h; ++y) {
    int x = 0;
    for (const auto& run : rows[static_cast<std::size_t>(y)]) {
      if (!run.is_array() || run.size() != 2) throw parse_error(what + ": run must be [value,len]");
      const int v = run[0].get<int>(), len = run[1].get<int>();
      if (v < 0 || v > max_value) throw parse_error(what + ": value " + std::to_string(v) + " out of range");
      if (len <= 0 || x + len > w) throw parse_error(what + ": runs overflow row " + std::to_string(y));
      for (int i = 0; i < len; ++i) labels.at(y, x + i) = v;
      x += len;
    }
    if (x != w) throw parse_error(what + ": row " + std::to_string(y) + " not fully covered");
  }
  return labels;
}

json load_document(const std::string& path, const std::string& expected_type) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw parse_error(path + ": " + e.what());  // nlohmann reports byte offset
  }
  if (!doc.is_object() || doc.value("type", "") != expected_type)
    throw parse_error(path + ": not a " + expected_type + " document");
  return doc;
}

void write_document(const json& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot open " + path + " for writing");
  out << doc.dump();
  out << '\n';
  if (!out) throw parse_error("short write to " + path);
}

}  // namespace

void InstanceParsing::validate() const {
  const int h = height(), w = width();
  if (categories.extent(0) != h || categories.extent(1) != w)
    throw contract_error("prediction categories dims mismatch");
  const int p = instance_count();
  for (double c : confidences)
    if (!(c >= 0.0 && c <= 1.0)) throw contract_error("confidence out of [0,1]");
  for (int k = 0; k < h * w; ++k) {
    const double id = instance_ids[k];
    const double cat = categories[k];
    if (id < 0 || id > p || id != std::floor(id))
      throw contract_error("instance id out of range at pixel " + std::to_string(k));
    if (cat < 0 || cat >= kNumCategories || cat != std::floor(cat))
      throw contract_error("category out of range at pixel " + std::to_string(k));
    if ((id > 0) != (cat > 0))
      throw contract_error("instance/category inconsistency at pixel " + std::to_string(k));
  }
  // ids contiguous: every id in 1..P occurs
  std::vector<int> seen(static_cast<std::size_t>(p) + 1, 0);
  for (int k = 0; k < h * w; ++k) ++seen[static_cast<std::size_t>(instance_ids[k])];
  for (int i = 1; i <= p; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw contract_error("instance id " + std::to_string(i) + " has no pixels");
}

void save_scene(const LabeledScene& scene, const std::string& path) {
  scene.validate();
  const int h = scene.height(), w = scene.width();
  json doc;
  doc["type"] = "scene";
  doc["height"] = h;
  doc["width"] = w;
  doc["person_count"] = scene.person_count;
  json img = json::array();
  for (int i = 0; i < scene.image.size(); ++i)
    img.push_back(static_cast<int>(std::lround(scene.image[i] * 255.0)));
  doc["image"] = std::move(img);
  doc["part_labels"] = rle_value_rows(scene.part_labels);
  json masks = json::array();
  for (const Tensor& m : scene.person_masks) masks.push_back(rle_binary_rows(m));
  doc["person_masks"] = std::move(masks);
  write_document(doc, path);
}

LabeledScene load_scene(const std::string& path) {
  const json doc = load_document(path, "scene");
  LabeledScene scene;
  try {
    const int h = doc.at("height").get<int>();
    const int w = doc.at("width").get<int>();
    if (h <= 0 || w <= 0) throw parse_error(path + ": non-positive dims");
    scene.person_count = doc.at("person_count").get<int>();
    const auto& img = doc.at("image");
    if (static_cast<int>(img.size()) != h * w * 3) throw parse_error(path + ": image length mismatch");
    scene.image = Tensor({h, w, 3});
    for (int i = 0; i < scene.image.size(); ++i) {
      const int v = img[static_cast<std::size_t>(i)].get<int>();
      if (v < 0 || v > 255) throw parse_error(path + ": image value out of 0-255");
      scene.image[i] = v / 255.0;
    }
    scene.part_labels = decode_value_rows(doc.at("part_labels"), h, w, kNumCategories - 1, path + ": part_labels");
    for (const auto& rows : doc.at("person_masks"))
      scene.person_masks.push_back(decode_binary_rows(rows, h, w, path + ": person_mask"));
  } catch (const json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
  scene.validate();  // invariant violations surface as contract_error
  return scene;
}

void save_prediction(const InstanceParsing& pred, const std::string& path) {
  pred.validate();
  json doc;
  doc["type"] = "prediction";
  doc["height"] = pred.height();
  doc["width"] = pred.width();
  doc["instance_count"] = pred.instance_count();
  doc["categories"] = rle_value_rows(pred.categories);
  json masks = json::array();
  for (int i = 1; i <= pred.instance_count(); ++i) {
    Tensor m({pred.height(), pred.width()});
    for (int k = 0; k < m.size(); ++k) m[k] = pred.instance_ids[k] == i ? 1.0 : 0.0;
    masks.push_back(rle_binary_rows(m));
  }
  doc["instances"] = std::move(masks);
  doc["confidences"] = pred.confidences;
  write_document(doc, path);
}

InstanceParsing load_prediction(const std::string& path) {
  const json doc = load_document(path, "prediction");
  InstanceParsing pred;
  try {
    const int h = doc.at("height").get<int>();
    const int w = doc.at("width").get<int>();
    if (h <= 0 || w <= 0) throw parse_error(path + ": non-positive dims");
    const int p = doc.at("instance_count").get<int>();
    pred.categories = decode_value_rows(doc.at("categories"), h, w, kNumCategories - 1, path + ": categories");
    pred.instance_ids = Tensor({h, w});
    const auto& masks = doc.at("instances");
    if (static_cast<int>(masks.size()) != p) throw parse_error(path + ": instance count mismatch");
    for (int i = 0; i < p; ++i) {
      const Tensor m = decode_binary_rows(masks[static_cast<std::size_t>(i)], h, w, path + ": instance");
      for (int k = 0; k < m.size(); ++k)
        if (m[k] != 0.0) {
          if (pred.instance_ids[k] != 0.0) throw parse_error(path + ": instances overlap at pixel " + std::to_string(k));
          pred.instance_ids[k] = i + 1;
        }
    }
    pred.confidences = doc.at("confidences").get<std::vector<double>>();
    if (static_cast<int>(pred.confidences.size()) != p) throw parse_error(path + ": confidence count mismatch");
  } catch (const json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
  pred.validate();
  return pred;
}

}  // namespace mhparse
