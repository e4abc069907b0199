#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sage/grid.hpp"

namespace sage {

inline constexpr std::size_t kClipLength = 16;

enum class Intent { crossing, not_crossing, unknown };

inline std::string_view to_string(Intent i) {
  switch (i) {
    case Intent::crossing: return "crossing";
    case Intent::not_crossing: return "not_crossing";
    case Intent::unknown: break;
  }
  return "unknown";
}

inline Intent parse_intent(std::string_view s) {
  if (s == "crossing") return Intent::crossing;
  if (s == "not_crossing") return Intent::not_crossing;
  if (s == "unknown") return Intent::unknown;
  throw ValidationError("unknown intent label '" + std::string(s) + "'");
}

/// Per-frame sidecar (meta.json).
struct FrameMeta {
  std::uint64_t frame_id = 0;
  std::optional<double> v_ego;  // km/h
  Intent intent = Intent::unknown;
  std::vector<BBox> bboxes;
  std::set<std::string> scenario_tags;

  friend bool operator==(const FrameMeta&, const FrameMeta&) = default;
};

inline nlohmann::json to_json(const BBox& b) {
  return {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}, {"class_name", b.class_name}};
}

inline nlohmann::json to_json(const FrameMeta& m) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : m.bboxes) boxes.push_back(to_json(b));
  nlohmann::json j = {{"frame_id", m.frame_id},
                      {"intent", std::string(to_string(m.intent))},
                      {"bboxes", boxes},
                      {"scenario_tags", m.scenario_tags}};
  if (m.v_ego) j["v_ego"] = *m.v_ego;
  return j;
}

inline FrameMeta frame_meta_from_json(const nlohmann::json& j) {
  try {
    FrameMeta m;
    m.frame_id = j.at("frame_id").get<std::uint64_t>();
    if (j.contains("v_ego") && !j.at("v_ego").is_null()) {
      m.v_ego = j.at("v_ego").get<double>();
      if (!(*m.v_ego >= 0.0)) throw ValidationError("v_ego must be >= 0");
    }
    m.intent = parse_intent(j.value("intent", std::string("unknown")));
    for (const auto& b : j.value("bboxes", nlohmann::json::array()))
      m.bboxes.push_back({b.at("x").get<std::size_t>(), b.at("y").get<std::size_t>(), b.at("w").get<std::size_t>(),
                          b.at("h").get<std::size_t>(), b.value("class_name", std::string("person"))});
    for (const auto& t : j.value("scenario_tags", nlohmann::json::array())) m.scenario_tags.insert(t.get<std::string>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("frame meta: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

/// Deterministic JSON output: sorted keys, two-space indent, trailing newline.
inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

inline FrameMeta load_frame_meta(const std::filesystem::path& path) {
  try {
    return frame_meta_from_json(read_json_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

/// One frame of a clip: its metadata plus the artifact files that belong to it.
struct FrameRecord {
  FrameMeta meta;
  std::filesystem::path gaze;
  std::filesystem::path mask;
  std::filesystem::path nearness;
};

/// Exactly sixteen consecutive frames; the temporal unit the pipeline gates on.
class ClipWindow {
 public:
  ClipWindow(std::string clip_id, std::vector<FrameRecord> frames, std::filesystem::path prediction = {},
             std::set<std::string> scenario_tags = {})
      : clip_id_(std::move(clip_id)),
        frames_(std::move(frames)),
        prediction_(std::move(prediction)),
        scenario_tags_(std::move(scenario_tags)) {
    if (frames_.size() != kClipLength)
      throw ValidationError("clip '" + clip_id_ + "' has " + std::to_string(frames_.size()) + " frames, expected " +
                            std::to_string(kClipLength));
    for (std::size_t i = 1; i < frames_.size(); ++i)
      if (frames_[i].meta.frame_id <= frames_[i - 1].meta.frame_id)
        throw ValidationError("clip '" + clip_id_ + "': frame ids must be strictly increasing");
  }

  const std::string& clip_id() const noexcept { return clip_id_; }
  const std::vector<FrameRecord>& frames() const noexcept { return frames_; }
  const FrameRecord& last() const noexcept { return frames_.back(); }
  const std::filesystem::path& prediction() const noexcept { return prediction_; }
  const std::set<std::string>& scenario_tags() const noexcept { return scenario_tags_; }

 private:
  std::string clip_id_;
  std::vector<FrameRecord> frames_;
  std::filesystem::path prediction_;
  std::set<std::string> scenario_tags_;
};

}  // namespace sage
