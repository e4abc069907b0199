#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sage/grid.hpp"
#include "sage/map_ops.hpp"
#include "sage/smap_io.hpp"

namespace sage {

struct InstanceDetection {
  std::string class_name;
  BinaryMask mask;
  double score = 1.0;
};

/// Driving-relevant object categories. Background is the complement and is never a member.
class CategoryFilter {
 public:
  static constexpr double kDefaultMinScore = 0.5;

  /// The eleven object classes kept for SAGE ground truth (background makes twelve).
  static const std::vector<std::string>& driving_categories() {
    static const std::vector<std::string> kCategories = {
        "person", "bicycle",      "car",       "motorcycle",    "bus",   "truck",
        "traffic light", "fire hydrant", "stop sign", "parking meter", "bench"};
    return kCategories;
  }

  CategoryFilter() : CategoryFilter(driving_categories()) {}

  explicit CategoryFilter(const std::vector<std::string>& keep, double min_score = kDefaultMinScore)
      : keep_(keep.begin(), keep.end()), min_score_(min_score) {
    if (keep_.empty()) throw ValidationError("category filter must keep at least one class");
    if (keep_.count("background")) throw ValidationError("'background' cannot be a kept category");
    if (!(min_score_ >= 0.0 && min_score_ <= 1.0)) throw ValidationError("min_score must lie in [0,1]");
  }

  bool keeps(const std::string& class_name) const { return keep_.count(class_name) > 0; }
  bool accepts(const InstanceDetection& d) const { return keeps(d.class_name) && d.score >= min_score_; }
  const std::set<std::string>& keep() const noexcept { return keep_; }
  double min_score() const noexcept { return min_score_; }

 private:
  std::set<std::string> keep_;
  double min_score_;
};

/// Binary object-vs-background mask: 1 wherever any accepted instance covers the pixel.
inline BinaryMask union_mask(const std::vector<InstanceDetection>& instances, const CategoryFilter& filter,
                             GridDims dims) {
  std::vector<std::uint8_t> out(dims.area(), 0);
  for (const auto& inst : instances) {
    require_same_dims(inst.mask.dims(), dims, "union_mask");
    if (!(inst.score >= 0.0 && inst.score <= 1.0))
      throw ValidationError("instance '" + inst.class_name + "' score outside [0,1]");
    if (!filter.accepts(inst)) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] |= inst.mask[i];
  }
  return BinaryMask(dims, std::move(out));
}

/// Pixelwise max of a max-normalized gaze map and the mask at full saliency.
inline SalMap superimpose(const SalMap& gaze, const BinaryMask& mask) {
  require_same_dims(gaze.dims(), mask.dims(), "superimpose");
  if (grid_max(gaze) > 1.0f) throw ValidationError("superimpose: gaze map must be max-normalized (max <= 1)");
  std::vector<float> out(gaze.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? 1.0f : gaze[i];
  return SalMap(gaze.dims(), std::move(out));
}

/// SAGE ground truth for one frame. Frame dims come from the instance masks, or
/// from `dims` when given; the gaze map is resized to them first.
inline SalMap build_sage_frame(const SalMap& gaze, const std::vector<InstanceDetection>& instances,
                               const CategoryFilter& filter, std::optional<GridDims> dims = std::nullopt) {
  GridDims frame = dims ? *dims : (instances.empty() ? gaze.dims() : instances.front().mask.dims());
  const SalMap aligned = normalize_max(resize_bilinear(gaze, frame));
  return superimpose(aligned, union_mask(instances, filter, frame));
}

/// Reads a per-frame instance file: either a JSON array or {"instances": [...]},
/// each entry {class_name, score, mask_path}; mask_path is relative to the file.
inline std::vector<InstanceDetection> load_instances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open instance file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("instance file '" + path.string() + "': " + e.what());
  }
  const nlohmann::json& list = doc.is_object() ? doc.value("instances", nlohmann::json::array()) : doc;
  if (!list.is_array()) throw ValidationError("instance file '" + path.string() + "': expected a list of instances");

  std::vector<InstanceDetection> out;
  for (const auto& item : list) {
    try {
      const auto mask_path = path.parent_path() / item.at("mask_path").get<std::string>();
      out.push_back({item.at("class_name").get<std::string>(), load_bmsk(mask_path), item.value("score", 1.0)});
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("instance file '" + path.string() + "': " + e.what());
    }
  }
  return out;
}

}  // namespace sage
