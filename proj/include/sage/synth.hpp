#pragma once

// Deterministic synthetic driving scenes.
//
// A scene file holds one or more [scene <name>] sections. [object] and
// [fixation] sections that follow a scene belong to it. Lines are
// `key = value ...`; '#' starts a comment. Coordinates are pixel indices
// (column x, row y); pixel centres sit on integer coordinates.
//
//   [scene <name>]
//     dims = <height> <width>                 default 128 256
//     frames = <n>                            multiple of 16, >= 16
//     tags = <tag> ...                        scenario tags of every clip
//     center_bias = <w>                       weight of the centre gaze bump, [0,1]
//     gaze_jitter = <px>                      uniform fixation jitter, default 0
//     speed = <kmh>                           constant ego speed
//     speed = <from> <to> <kmh>               override on an inclusive frame range
//     crossing = <from> <to>                  frames whose intent is "crossing"
//     prediction_floor = <v>                  added to the stand-in model output, default 0.02
//     prediction_center_bias = <w>            centre prior of the stand-in model, default 0.5
//   [object]
//     class = <name words>                    e.g. person, car, traffic light
//     shape = rect | ellipse
//     center = <x> <y>                        position at frame 0
//     half_size = <rx> <ry>
//     velocity = <vx> <vy>                    pixels per frame, default 0 0
//     grow = <gx> <gy>                        half-size change per frame, default 0 0
//     nearness = <start> [<rate>]             clamped to [0,1], default 0.5 0
//   [fixation]
//     at = <x> <y>  |  follow = <object index>
//     velocity = <vx> <vy>                    only with `at`
//     sigma = <px>
//     frames = <from> <to>                    default: all frames
//     period = <length> <on>                  active while (t mod length) < on

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sage/clip.hpp"
#include "sage/groundtruth.hpp"
#include "sage/manifest.hpp"
#include "sage/map_ops.hpp"
#include "sage/parallel.hpp"
#include "sage/smap_io.hpp"

namespace sage {

inline constexpr GridDims kDefaultWorkingDims{128, 256};

struct Seed {
  std::uint64_t value = 0;
};

/// Counter-based generator: every draw is a pure function of its key, so any
/// frame can be rendered independently of the others.
class CounterRng {
 public:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t bits(Seed seed, std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) noexcept {
    std::uint64_t h = mix(seed.value);
    for (std::uint64_t k : {a, b, c, d}) h = mix(h ^ k);
    return h;
  }

  /// Uniform in [0, 1).
  static double uniform(Seed seed, std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) noexcept {
    return static_cast<double>(bits(seed, a, b, c, d) >> 11) * 0x1.0p-53;
  }
};

// ---------------------------------------------------------------------------
// Scene description

enum class ShapeKind { rect, ellipse };

struct ScriptedObject {
  std::string class_name;
  ShapeKind shape = ShapeKind::rect;
  double cx = 0, cy = 0;
  double rx = 1, ry = 1;
  double vx = 0, vy = 0;
  double gx = 0, gy = 0;
  double nearness = 0.5;
  double nearness_rate = 0.0;

  double center_x(std::uint64_t t) const noexcept { return cx + vx * static_cast<double>(t); }
  double center_y(std::uint64_t t) const noexcept { return cy + vy * static_cast<double>(t); }
  double half_w(std::uint64_t t) const noexcept { return std::max(0.0, rx + gx * static_cast<double>(t)); }
  double half_h(std::uint64_t t) const noexcept { return std::max(0.0, ry + gy * static_cast<double>(t)); }
  double nearness_at(std::uint64_t t) const noexcept {
    return std::clamp(nearness + nearness_rate * static_cast<double>(t), 0.0, 1.0);
  }

  /// Centre-of-pixel inclusion test.
  bool covers(std::uint64_t t, std::size_t row, std::size_t col) const noexcept {
    const double dx = static_cast<double>(col) - center_x(t);
    const double dy = static_cast<double>(row) - center_y(t);
    const double hw = half_w(t), hh = half_h(t);
    if (shape == ShapeKind::rect) return std::abs(dx) <= hw && std::abs(dy) <= hh;
    if (hw <= 0.0 || hh <= 0.0) return dx == 0.0 && dy == 0.0;
    return (dx * dx) / (hw * hw) + (dy * dy) / (hh * hh) <= 1.0;
  }
};

struct FrameRange {
  std::uint64_t from = 0;
  std::uint64_t to = 0;  // inclusive
  bool contains(std::uint64_t t) const noexcept { return t >= from && t <= to; }
};

struct FixationScript {
  std::optional<std::size_t> follow;  // object index; otherwise a free point
  double x = 0, y = 0;
  double vx = 0, vy = 0;
  double sigma = 8.0;
  std::optional<FrameRange> frames;
  std::size_t period = 0;  // 0 = always on
  std::size_t period_on = 0;

  bool active(std::uint64_t t) const noexcept {
    if (frames && !frames->contains(t)) return false;
    return period == 0 || (t % period) < period_on;
  }
};

struct SpeedSegment {
  FrameRange frames;
  double kmh = 0.0;
};

struct SceneSpec {
  std::string name = "scene";
  GridDims dims = kDefaultWorkingDims;
  std::size_t n_frames = kClipLength;
  std::set<std::string> tags;
  std::vector<ScriptedObject> objects;
  std::vector<FixationScript> fixations;
  double center_bias = 0.0;
  double gaze_jitter = 0.0;
  double base_speed = 0.0;
  std::vector<SpeedSegment> speed_segments;
  std::vector<FrameRange> crossing_events;
  double prediction_floor = 0.02;
  double prediction_center_bias = 0.5;

  std::size_t clip_count() const noexcept { return n_frames / kClipLength; }

  double speed_at(std::uint64_t t) const noexcept {
    double v = base_speed;
    for (const auto& s : speed_segments)
      if (s.frames.contains(t)) v = s.kmh;
    return v;
  }

  std::vector<double> speed_profile() const {
    std::vector<double> out(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t) out[t] = speed_at(t);
    return out;
  }

  Intent intent_at(std::uint64_t t) const noexcept {
    for (const auto& r : crossing_events)
      if (r.contains(t)) return Intent::crossing;
    return Intent::not_crossing;
  }

  std::string clip_id(std::size_t clip) const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03zu", clip);
    return name + "_" + buf;
  }

  void validate() const;
};

inline void SceneSpec::validate() const {
  const std::string where = "scene '" + name + "': ";
  if (!dims.valid()) throw ValidationError(where + "dims must be >= 1");
  if (n_frames < kClipLength || n_frames % kClipLength != 0)
    throw ValidationError(where + "frames must be a positive multiple of 16");
  if (!(center_bias >= 0.0 && center_bias <= 1.0)) throw ValidationError(where + "center_bias must lie in [0,1]");
  if (!(gaze_jitter >= 0.0)) throw ValidationError(where + "gaze_jitter must be >= 0");
  if (!(base_speed >= 0.0)) throw ValidationError(where + "speed must be >= 0");
  for (const auto& s : speed_segments)
    if (!(s.kmh >= 0.0) || s.frames.from > s.frames.to) throw ValidationError(where + "invalid speed segment");
  for (const auto& r : crossing_events)
    if (r.from > r.to) throw ValidationError(where + "crossing range must satisfy from <= to");
  if (!(prediction_floor >= 0.0) || !(prediction_center_bias >= 0.0))
    throw ValidationError(where + "prediction parameters must be >= 0");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    const std::string ow = where + "object " + std::to_string(i) + ": ";
    if (o.class_name.empty()) throw ValidationError(ow + "class is required");
    if (!(o.rx >= 0.0 && o.ry >= 0.0)) throw ValidationError(ow + "half_size must be >= 0");
    if (!(o.nearness >= 0.0 && o.nearness <= 1.0)) throw ValidationError(ow + "nearness must lie in [0,1]");
    for (std::uint64_t t = 0; t < n_frames; ++t) {
      const double x = o.center_x(t), y = o.center_y(t), hw = o.half_w(t), hh = o.half_h(t);
      const bool overlaps = x + hw >= 0.0 && x - hw <= static_cast<double>(dims.width - 1) && y + hh >= 0.0 &&
                            y - hh <= static_cast<double>(dims.height - 1);
      if (!overlaps) throw ValidationError(ow + "leaves the grid at frame " + std::to_string(t));
    }
  }
  for (std::size_t i = 0; i < fixations.size(); ++i) {
    const auto& f = fixations[i];
    const std::string fw = where + "fixation " + std::to_string(i) + ": ";
    if (!(f.sigma > 0.0)) throw ValidationError(fw + "sigma must be > 0");
    if (f.follow && *f.follow >= objects.size()) throw ValidationError(fw + "follows an unknown object");
    if (f.period != 0 && f.period_on > f.period) throw ValidationError(fw + "period 'on' exceeds its length");
    if (f.frames && f.frames->from > f.frames->to) throw ValidationError(fw + "frames must satisfy from <= to");
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

class SceneParser {
 public:
  explicit SceneParser(std::string origin) : origin_(std::move(origin)) {}

  std::vector<SceneSpec> parse(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto tokens = split_ws(line);
      if (tokens.empty()) continue;
      if (tokens.front().front() == '[') {
        section(line);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail("expected 'key = value'");
      const auto keys = split_ws(line.substr(0, eq));
      if (keys.size() != 1) fail("malformed key");
      assign(keys.front(), split_ws(line.substr(eq + 1)));
    }
    if (scenes_.empty()) fail("no [scene] section");
    for (const auto& s : scenes_) s.validate();
    return std::move(scenes_);
  }

 private:
  enum class Section { none, scene, object, fixation };

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError(origin_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  void section(const std::string& line) {
    const auto open = line.find('['), close = line.find(']');
    if (close == std::string::npos || close < open) fail("unterminated section header");
    const auto words = split_ws(line.substr(open + 1, close - open - 1));
    if (words.empty()) fail("empty section header");
    if (words[0] == "scene") {
      if (words.size() != 2) fail("expected [scene <name>]");
      for (const auto& s : scenes_)
        if (s.name == words[1]) fail("duplicate scene '" + words[1] + "'");
      scenes_.push_back({});
      scenes_.back().name = words[1];
      current_ = Section::scene;
    } else if (words[0] == "object" || words[0] == "fixation") {
      if (scenes_.empty()) fail("[" + words[0] + "] before any [scene]");
      if (words[0] == "object") {
        scenes_.back().objects.push_back({});
        current_ = Section::object;
      } else {
        scenes_.back().fixations.push_back({});
        current_ = Section::fixation;
      }
    } else {
      fail("unknown section '" + words[0] + "'");
    }
  }

  double num(const std::string& s) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail("not a number: '" + s + "'");
    }
  }

  std::uint64_t count(const std::string& s) const {
    const double v = num(s);
    if (v < 0 || v != std::floor(v)) fail("expected a non-negative integer: '" + s + "'");
    return static_cast<std::uint64_t>(v);
  }

  void arity(const std::vector<std::string>& v, std::size_t lo, std::size_t hi, const std::string& key) const {
    if (v.size() < lo || v.size() > hi) fail("wrong number of values for '" + key + "'");
  }

  void assign(const std::string& key, const std::vector<std::string>& v) {
    switch (current_) {
      case Section::none: fail("key outside any section");
      case Section::scene: return scene_key(scenes_.back(), key, v);
      case Section::object: return object_key(scenes_.back().objects.back(), key, v);
      case Section::fixation: return fixation_key(scenes_.back().fixations.back(), key, v);
    }
  }

  void scene_key(SceneSpec& s, const std::string& key, const std::vector<std::string>& v) {
    if (key == "dims") {
      arity(v, 2, 2, key);
      s.dims = {count(v[0]), count(v[1])};
    } else if (key == "frames") {
      arity(v, 1, 1, key);
      s.n_frames = count(v[0]);
    } else if (key == "tags") {
      s.tags.insert(v.begin(), v.end());
    } else if (key == "center_bias") {
      arity(v, 1, 1, key);
      s.center_bias = num(v[0]);
    } else if (key == "gaze_jitter") {
      arity(v, 1, 1, key);
      s.gaze_jitter = num(v[0]);
    } else if (key == "speed") {
      arity(v, 1, 3, key);
      if (v.size() == 1)
        s.base_speed = num(v[0]);
      else if (v.size() == 3)
        s.speed_segments.push_back({{count(v[0]), count(v[1])}, num(v[2])});
      else
        fail("speed takes <kmh> or <from> <to> <kmh>");
    } else if (key == "crossing") {
      arity(v, 2, 2, key);
      s.crossing_events.push_back({count(v[0]), count(v[1])});
    } else if (key == "prediction_floor") {
      arity(v, 1, 1, key);
      s.prediction_floor = num(v[0]);
    } else if (key == "prediction_center_bias") {
      arity(v, 1, 1, key);
      s.prediction_center_bias = num(v[0]);
    } else {
      fail("unknown scene key '" + key + "'");
    }
  }

  void object_key(ScriptedObject& o, const std::string& key, const std::vector<std::string>& v) {
    if (key == "class") {
      if (v.empty()) fail("class needs a name");
      o.class_name.clear();
      for (const auto& w : v) o.class_name += (o.class_name.empty() ? "" : " ") + w;
    } else if (key == "shape") {
      arity(v, 1, 1, key);
      if (v[0] == "rect")
        o.shape = ShapeKind::rect;
      else if (v[0] == "ellipse")
        o.shape = ShapeKind::ellipse;
      else
        fail("shape must be rect or ellipse");
    } else if (key == "center") {
      arity(v, 2, 2, key);
      o.cx = num(v[0]);
      o.cy = num(v[1]);
    } else if (key == "half_size") {
      arity(v, 2, 2, key);
      o.rx = num(v[0]);
      o.ry = num(v[1]);
    } else if (key == "velocity") {
      arity(v, 2, 2, key);
      o.vx = num(v[0]);
      o.vy = num(v[1]);
    } else if (key == "grow") {
      arity(v, 2, 2, key);
      o.gx = num(v[0]);
      o.gy = num(v[1]);
    } else if (key == "nearness") {
      arity(v, 1, 2, key);
      o.nearness = num(v[0]);
      o.nearness_rate = v.size() == 2 ? num(v[1]) : 0.0;
    } else {
      fail("unknown object key '" + key + "'");
    }
  }

  void fixation_key(FixationScript& f, const std::string& key, const std::vector<std::string>& v) {
    if (key == "at") {
      arity(v, 2, 2, key);
      f.x = num(v[0]);
      f.y = num(v[1]);
      f.follow.reset();
    } else if (key == "follow") {
      arity(v, 1, 1, key);
      f.follow = count(v[0]);
    } else if (key == "velocity") {
      arity(v, 2, 2, key);
      f.vx = num(v[0]);
      f.vy = num(v[1]);
    } else if (key == "sigma") {
      arity(v, 1, 1, key);
      f.sigma = num(v[0]);
    } else if (key == "frames") {
      arity(v, 2, 2, key);
      f.frames = FrameRange{count(v[0]), count(v[1])};
    } else if (key == "period") {
      arity(v, 2, 2, key);
      f.period = count(v[0]);
      f.period_on = count(v[1]);
    } else {
      fail("unknown fixation key '" + key + "'");
    }
  }

  std::string origin_;
  std::size_t line_no_ = 0;
  Section current_ = Section::none;
  std::vector<SceneSpec> scenes_;
};

}  // namespace detail

inline std::vector<SceneSpec> parse_scenes(std::istream& in, const std::string& origin = "<scene>") {
  return detail::SceneParser(origin).parse(in);
}

inline std::vector<SceneSpec> parse_scenes(const std::string& text) {
  std::istringstream in(text);
  return parse_scenes(in);
}

inline std::vector<SceneSpec> load_scenes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file '" + path.string() + "'");
  return parse_scenes(in, path.string());
}

// ---------------------------------------------------------------------------
// Rendering

struct Fixation {
  double x = 0;
  double y = 0;
  double sigma = 1;
};

/// Unit-height isotropic Gaussian bumps at each fixation plus `center_bias`
/// times a bump of sigma width/8 at the centre pixel (width/2, height/2), then
/// max-normalized. No fixations and zero bias yields an all-zero map.
inline SalMap render_gaze(const std::vector<Fixation>& fixations, double center_bias, GridDims dims) {
  if (!dims.valid()) throw ValidationError("render_gaze: dims must be >= 1");
  for (const auto& f : fixations)
    if (!(f.sigma > 0.0)) throw ValidationError("render_gaze: sigma must be > 0");
  const double ccx = static_cast<double>(dims.width / 2);
  const double ccy = static_cast<double>(dims.height / 2);
  const double csig = static_cast<double>(dims.width) / 8.0;
  std::vector<float> out(dims.area());
  for (std::size_t r = 0; r < dims.height; ++r) {
    for (std::size_t c = 0; c < dims.width; ++c) {
      const double x = static_cast<double>(c), y = static_cast<double>(r);
      double v = 0.0;
      for (const auto& f : fixations) {
        const double d2 = (x - f.x) * (x - f.x) + (y - f.y) * (y - f.y);
        v += std::exp(-d2 / (2.0 * f.sigma * f.sigma));
      }
      if (center_bias > 0.0) {
        const double d2 = (x - ccx) * (x - ccx) + (y - ccy) * (y - ccy);
        v += center_bias * std::exp(-d2 / (2.0 * csig * csig));
      }
      out[r * dims.width + c] = static_cast<float>(v);
    }
  }
  return normalize_max(SalMap(dims, std::move(out)));
}

/// Everything the generator derives for one frame.
struct RenderedFrame {
  SalMap gaze;
  BinaryMask mask;
  SalMap nearness;
  FrameMeta meta;
};

/// Tight box around the pixels an object covers at frame t, if any.
inline std::optional<BBox> object_bbox(const ScriptedObject& o, std::uint64_t t, GridDims dims) {
  std::size_t r0 = dims.height, r1 = 0, c0 = dims.width, c1 = 0;
  bool any = false;
  for (std::size_t r = 0; r < dims.height; ++r)
    for (std::size_t c = 0; c < dims.width; ++c)
      if (o.covers(t, r, c)) {
        any = true;
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
  if (!any) return std::nullopt;
  return BBox{c0, r0, c1 - c0 + 1, r1 - r0 + 1, o.class_name};
}

inline std::vector<Fixation> fixations_at(const SceneSpec& spec, std::size_t scene_index, std::uint64_t t, Seed seed) {
  std::vector<Fixation> out;
  for (std::size_t i = 0; i < spec.fixations.size(); ++i) {
    const auto& f = spec.fixations[i];
    if (!f.active(t)) continue;
    double x, y;
    if (f.follow) {
      x = spec.objects[*f.follow].center_x(t);
      y = spec.objects[*f.follow].center_y(t);
    } else {
      x = f.x + f.vx * static_cast<double>(t);
      y = f.y + f.vy * static_cast<double>(t);
    }
    if (spec.gaze_jitter > 0.0) {
      x += spec.gaze_jitter * (2.0 * CounterRng::uniform(seed, scene_index, t, i, 0) - 1.0);
      y += spec.gaze_jitter * (2.0 * CounterRng::uniform(seed, scene_index, t, i, 1) - 1.0);
    }
    x = std::clamp(x, 0.0, static_cast<double>(spec.dims.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(spec.dims.height - 1));
    out.push_back({x, y, f.sigma});
  }
  return out;
}

inline RenderedFrame render_frame(const SceneSpec& spec, std::size_t scene_index, std::uint64_t t, Seed seed,
                                  const CategoryFilter& filter = {}) {
  const GridDims dims = spec.dims;
  std::vector<std::uint8_t> mask(dims.area(), 0);
  std::vector<float> near(dims.area(), 0.0f);
  for (const auto& o : spec.objects) {
    const bool kept = filter.keeps(o.class_name);
    const auto n = static_cast<float>(o.nearness_at(t));
    for (std::size_t r = 0; r < dims.height; ++r)
      for (std::size_t c = 0; c < dims.width; ++c)
        if (o.covers(t, r, c)) {
          const std::size_t i = r * dims.width + c;
          if (kept) mask[i] = 1;
          near[i] = std::max(near[i], n);
        }
  }

  FrameMeta meta;
  meta.frame_id = t;
  meta.v_ego = spec.speed_at(t);
  meta.intent = spec.intent_at(t);
  meta.scenario_tags = spec.tags;
  for (const auto& o : spec.objects)
    if (o.class_name == "person")
      if (auto b = object_bbox(o, t, dims)) meta.bboxes.push_back(*b);

  return {render_gaze(fixations_at(spec, scene_index, t, seed), spec.center_bias, dims),
          BinaryMask(dims, std::move(mask)), SalMap(dims, std::move(near)), std::move(meta)};
}

/// Stand-in for a gaze-trained saliency model: the clip's mean gaze plus a
/// centre prior and a small floor, max-normalized.
inline SalMap stand_in_prediction(const SceneSpec& spec, const std::vector<SalMap>& clip_gaze) {
  const GridDims dims = spec.dims;
  const SalMap prior = render_gaze({}, 1.0, dims);
  std::vector<double> acc(dims.area(), 0.0);
  for (const auto& g : clip_gaze)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
  std::vector<float> out(dims.area());
  const double n = static_cast<double>(clip_gaze.size());
  for (std::size_t i = 0; i < acc.size(); ++i)
    out[i] = static_cast<float>(acc[i] / n + spec.prediction_center_bias * prior[i] + spec.prediction_floor);
  return normalize_max(SalMap(dims, std::move(out)));
}

// ---------------------------------------------------------------------------
// Corpus generation

namespace detail {

inline std::string frame_dir_name(std::uint64_t t) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "f%04llu", static_cast<unsigned long long>(t));
  return buf;
}

}  // namespace detail

/// Writes every scene into out_dir and returns the manifest (also written as
/// out_dir/manifest.json). Layout per clip:
///   <clip_id>/prediction.smap
///   <clip_id>/fNNNN/{gaze.smap, mask.bmsk, nearness.smap, meta.json}
/// Output bytes depend only on (scenes, seed); `workers` only changes speed.
inline CorpusManifest generate_corpus(const std::vector<SceneSpec>& scenes, Seed seed,
                                      const std::filesystem::path& out_dir, std::size_t workers = 1) {
  if (scenes.empty()) throw ValidationError("generate_corpus: no scenes");
  for (const auto& s : scenes) {
    s.validate();
    if (s.dims != scenes.front().dims) throw ValidationError("generate_corpus: all scenes must share dims");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  struct ClipJob {
    std::size_t scene;
    std::size_t clip;
  };
  std::vector<ClipJob> jobs;
  for (std::size_t s = 0; s < scenes.size(); ++s)
    for (std::size_t c = 0; c < scenes[s].clip_count(); ++c) jobs.push_back({s, c});

  CorpusManifest manifest;
  manifest.root = out_dir;
  manifest.dims = scenes.front().dims;
  manifest.clips.resize(jobs.size());

  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    const SceneSpec& spec = scenes[jobs[j].scene];
    ClipEntry entry;
    entry.clip_id = spec.clip_id(jobs[j].clip);
    entry.scenario_tags = spec.tags;
    const auto clip_dir = out_dir / entry.clip_id;
    std::vector<SalMap> gazes;
    for (std::size_t k = 0; k < kClipLength; ++k) {
      const std::uint64_t t = jobs[j].clip * kClipLength + k;
      const auto frame = render_frame(spec, jobs[j].scene, t, seed);
      const auto dir = clip_dir / detail::frame_dir_name(t);
      std::filesystem::create_directories(dir);
      FrameEntry fe{t, dir / "gaze.smap", dir / "mask.bmsk", dir / "nearness.smap", dir / "meta.json"};
      save_smap(frame.gaze, fe.gaze);
      save_bmsk(frame.mask, fe.mask);
      save_smap(frame.nearness, fe.nearness);
      write_json_file(fe.meta, to_json(frame.meta));
      entry.frames.push_back(std::move(fe));
      gazes.push_back(frame.gaze);
    }
    entry.prediction = clip_dir / "prediction.smap";
    save_smap(stand_in_prediction(spec, gazes), entry.prediction);
    manifest.clips[j] = std::move(entry);
  });

  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

inline CorpusManifest generate_corpus(const SceneSpec& scene, Seed seed, const std::filesystem::path& out_dir,
                                      std::size_t workers = 1) {
  return generate_corpus(std::vector<SceneSpec>{scene}, seed, out_dir, workers);
}

}  // namespace sage
