#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sage/clip.hpp"
#include "sage/grid.hpp"

namespace sage {

inline constexpr const char* kManifestFormat = "sage-corpus/1";

struct FrameEntry {
  std::uint64_t frame_id = 0;
  std::filesystem::path gaze;
  std::filesystem::path mask;
  std::filesystem::path nearness;
  std::filesystem::path meta;
};

struct ClipEntry {
  std::string clip_id;
  std::set<std::string> scenario_tags;
  std::filesystem::path prediction;
  std::vector<FrameEntry> frames;
};

/// Corpus index. Artifact paths are stored relative to `root` on disk and
/// resolved to full paths in memory.
struct CorpusManifest {
  std::filesystem::path root;
  GridDims dims{};
  std::vector<ClipEntry> clips;
};

namespace detail {

inline std::string rel(const std::filesystem::path& p, const std::filesystem::path& root) {
  return p.lexically_relative(root).generic_string();
}

}  // namespace detail

inline nlohmann::json to_json(const CorpusManifest& m) {
  nlohmann::json clips = nlohmann::json::array();
  for (const auto& c : m.clips) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : c.frames)
      frames.push_back({{"frame_id", f.frame_id},
                        {"gaze", detail::rel(f.gaze, m.root)},
                        {"mask", detail::rel(f.mask, m.root)},
                        {"nearness", detail::rel(f.nearness, m.root)},
                        {"meta", detail::rel(f.meta, m.root)}});
    clips.push_back({{"clip_id", c.clip_id},
                     {"scenario_tags", c.scenario_tags},
                     {"prediction", detail::rel(c.prediction, m.root)},
                     {"frames", frames}});
  }
  return {{"format", kManifestFormat}, {"dims", {{"height", m.dims.height}, {"width", m.dims.width}}}, {"clips", clips}};
}

inline void save_manifest(const CorpusManifest& m, const std::filesystem::path& path) {
  write_json_file(path, to_json(m));
}

enum class ManifestCheck {
  strict,   // every referenced file must exist
  lenient,  // structure only; missing artifacts surface per clip later
};

/// Files named by a clip that do not exist.
inline std::vector<std::filesystem::path> missing_artifacts(const ClipEntry& c) {
  std::vector<std::filesystem::path> missing;
  auto check = [&](const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) missing.push_back(p);
  };
  check(c.prediction);
  for (const auto& f : c.frames) {
    check(f.gaze);
    check(f.mask);
    check(f.nearness);
    check(f.meta);
  }
  return missing;
}

inline CorpusManifest load_manifest(const std::filesystem::path& path, ManifestCheck check = ManifestCheck::strict) {
  const nlohmann::json j = read_json_file(path);
  CorpusManifest m;
  m.root = path.parent_path();
  try {
    if (j.value("format", std::string()) != kManifestFormat)
      throw ValidationError(path.string() + ": unsupported manifest format");
    m.dims = {j.at("dims").at("height").get<std::size_t>(), j.at("dims").at("width").get<std::size_t>()};
    if (!m.dims.valid()) throw ValidationError(path.string() + ": manifest dims must be >= 1");
    std::set<std::string> seen;
    for (const auto& cj : j.at("clips")) {
      ClipEntry c;
      c.clip_id = cj.at("clip_id").get<std::string>();
      if (!seen.insert(c.clip_id).second) throw ValidationError("duplicate clip_id '" + c.clip_id + "'");
      for (const auto& t : cj.value("scenario_tags", nlohmann::json::array())) c.scenario_tags.insert(t.get<std::string>());
      c.prediction = m.root / cj.at("prediction").get<std::string>();
      for (const auto& fj : cj.at("frames"))
        c.frames.push_back({fj.at("frame_id").get<std::uint64_t>(), m.root / fj.at("gaze").get<std::string>(),
                            m.root / fj.at("mask").get<std::string>(), m.root / fj.at("nearness").get<std::string>(),
                            m.root / fj.at("meta").get<std::string>()});
      if (c.frames.size() != kClipLength)
        throw ValidationError("clip '" + c.clip_id + "' has " + std::to_string(c.frames.size()) + " frames, expected " +
                              std::to_string(kClipLength));
      if (check == ManifestCheck::strict)
        if (auto missing = missing_artifacts(c); !missing.empty())
          throw ValidationError("clip '" + c.clip_id + "': missing artifact " + missing.front().string());
      m.clips.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return m;
}

inline const ClipEntry& find_clip(const CorpusManifest& m, const std::string& clip_id) {
  for (const auto& c : m.clips)
    if (c.clip_id == clip_id) return c;
  throw ValidationError("clip '" + clip_id + "' not found in manifest");
}

/// Reads each frame's meta.json and assembles the clip window.
inline ClipWindow open_clip(const ClipEntry& c) {
  std::vector<FrameRecord> frames;
  frames.reserve(c.frames.size());
  for (const auto& f : c.frames) {
    FrameMeta meta = load_frame_meta(f.meta);
    if (meta.frame_id != f.frame_id)
      throw ValidationError("clip '" + c.clip_id + "': " + f.meta.string() + " carries frame_id " +
                            std::to_string(meta.frame_id) + ", manifest says " + std::to_string(f.frame_id));
    frames.push_back({std::move(meta), f.gaze, f.mask, f.nearness});
  }
  return ClipWindow(c.clip_id, std::move(frames), c.prediction, c.scenario_tags);
}

}  // namespace sage
