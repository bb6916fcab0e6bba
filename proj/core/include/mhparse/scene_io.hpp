#pragma once

#include <string>
#include <vector>

#include "mhparse/instance_types.hpp"
#include "mhparse/scene.hpp"

namespace mhparse {

// One JSON document per scene: image as 0-255 integer triplets, person masks
// as per-row [start,length] runs, part labels as per-row [value,length] runs.
// load(save(x)) == x bit-exactly (image values live on the 1/255 grid).
void save_scene(const LabeledScene& scene, const std::string& path);
LabeledScene load_scene(const std::string& path);

// Prediction files share the scene RLE shape plus per-instance confidences.
void save_prediction(const InstanceParsing& pred, const std::string& path);
InstanceParsing load_prediction(const std::string& path);

}  // namespace mhparse
