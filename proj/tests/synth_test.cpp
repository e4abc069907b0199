#include <gtest/gtest.h>

#include <cmath>

#include "sage/synth.hpp"
#include "test_support.hpp"

namespace sage {
namespace {

namespace fs = std::filesystem;

const fs::path kCanned = fs::path(SAGE_SOURCE_DIR) / "scenes" / "canned.scene";

std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = test::read_bytes(e.path());
  return out;
}

TEST(RenderGaze, SingleFixationPeaksAtOne) {
  const auto g = render_gaze({{20, 7, 3.0}}, 0.0, {16, 32});
  EXPECT_EQ(g.at(7, 20), 1.0f);
  EXPECT_EQ(grid_argmax(g), 7u * 32 + 20);
}

TEST(RenderGaze, CenterBiasPeaksAtCenterPixel) {
  const GridDims d{12, 20};
  const auto g = render_gaze({}, 1.0, d);
  EXPECT_EQ(grid_argmax(g), (d.height / 2) * d.width + d.width / 2);
  EXPECT_EQ(g.at(6, 10), 1.0f);
}

TEST(RenderGaze, EmptyIsZero) { EXPECT_EQ(grid_max(render_gaze({}, 0.0, {4, 4})), 0.0f); }

TEST(RenderGaze, TwoDistantFixationsShareMax) {
  const double sigma = 4.0, dist = 60.0;
  const auto g = render_gaze({{10, 16, sigma}, {10 + dist, 16, sigma}}, 0.0, {32, 80});
  // Each peak is 1 + exp(-d^2 / 2 sigma^2), so both peaks agree and the overlap term is negligible.
  EXPECT_NEAR(g.at(16, 10), g.at(16, 70), 1e-6);
  EXPECT_NEAR(g.at(16, 10), 1.0, std::exp(-dist * dist / (2 * sigma * sigma)) + 1e-6);
}

TEST(RenderGaze, RejectsBadSigma) { EXPECT_THROW(render_gaze({{1, 1, 0.0}}, 0.0, {4, 4}), ValidationError); }

TEST(CounterRng, KeyedAndStable) {
  const Seed s{17};
  EXPECT_EQ(CounterRng::bits(s, 1, 2, 3, 4), CounterRng::bits(s, 1, 2, 3, 4));
  EXPECT_NE(CounterRng::bits(s, 1, 2, 3, 4), CounterRng::bits(s, 1, 2, 3, 5));
  EXPECT_NE(CounterRng::bits(s, 1, 2, 3, 4), CounterRng::bits(Seed{18}, 1, 2, 3, 4));
  for (int i = 0; i < 1000; ++i) {
    const double u = CounterRng::uniform(s, i, 0, 0, 0);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(SceneParser, ParsesCannedFile) {
  const auto scenes = load_scenes(kCanned);
  ASSERT_EQ(scenes.size(), 3u);
  EXPECT_EQ(scenes[0].name, "crossing");
  EXPECT_EQ(scenes[0].dims, (GridDims{128, 256}));
  EXPECT_GE(scenes[0].clip_count(), 10u);
  EXPECT_EQ(scenes[0].objects.size(), 2u);
  EXPECT_TRUE(scenes[0].tags.count("crossing"));
  EXPECT_EQ(scenes[1].objects[2].class_name, "traffic light");
  EXPECT_EQ(scenes[2].objects.size(), 0u);
}

TEST(SceneParser, ReportsLineNumbers) {
  try {
    parse_scenes("[scene a]\nframes = 16\nbogus = 1\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_scenes("frames = 16\n"), ValidationError);
  EXPECT_THROW(parse_scenes("[scene a]\nframes = 20\n"), ValidationError);
  EXPECT_THROW(parse_scenes("[scene a]\nframes = x\n"), ValidationError);
  EXPECT_THROW(parse_scenes("[scene a]\n[fixation]\nfollow = 0\n"), ValidationError);
  EXPECT_THROW(parse_scenes("[scene a]\ndims = 8 8\n[object]\nclass = car\ncenter = 100 100\n"), ValidationError);
}

SceneSpec static_car_scene() {
  SceneSpec s;
  s.name = "static";
  s.dims = {24, 40};
  s.n_frames = 32;
  s.tags = {"static"};
  s.objects.push_back({"car", ShapeKind::ellipse, 20, 12, 6, 4, 0, 0, 0, 0, 0.8, 0});
  s.fixations.push_back({});
  s.fixations.back().x = 20;
  s.fixations.back().y = 10;
  s.fixations.back().sigma = 4;
  s.base_speed = 30;
  return s;
}

TEST(GenerateCorpus, StaticCarNearnessExact) {
  test::TempDir dir("synth");
  const auto spec = static_car_scene();
  const auto manifest = generate_corpus(spec, Seed{1}, dir.path());
  ASSERT_EQ(manifest.clips.size(), 2u);
  for (const auto& clip : manifest.clips)
    for (const auto& f : clip.frames) {
      const auto near = load_smap(f.nearness);
      const auto mask = load_bmsk(f.mask);
      for (std::size_t r = 0; r < spec.dims.height; ++r)
        for (std::size_t c = 0; c < spec.dims.width; ++c) {
          const double dx = (double(c) - 20) / 6, dy = (double(r) - 12) / 4;
          const bool inside = dx * dx + dy * dy <= 1.0;
          EXPECT_EQ(near.at(r, c), inside ? 0.8f : 0.0f);
          EXPECT_EQ(mask.at(r, c), inside ? 1 : 0);
        }
    }
}

TEST(GenerateCorpus, CrossingEventMarksClipTwo) {
  test::TempDir dir("synth");
  SceneSpec s;
  s.name = "x";
  s.dims = {32, 48};
  s.n_frames = 48;
  s.crossing_events.push_back({16, 31});
  s.objects.push_back({"person", ShapeKind::rect, 10.3, 15.6, 2.5, 5.2, 0.5, 0, 0, 0, 0.9, 0});
  s.base_speed = 5;
  const auto manifest = generate_corpus(s, Seed{3}, dir.path());
  ASSERT_EQ(manifest.clips.size(), 3u);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto clip = open_clip(manifest.clips[c]);
    for (const auto& f : clip.frames()) {
      EXPECT_EQ(f.meta.intent, c == 1 ? Intent::crossing : Intent::not_crossing);
      // Bbox oracle: min/max of covered pixel centres.
      std::size_t r0 = 99, r1 = 0, c0 = 99, c1 = 0;
      const auto t = f.meta.frame_id;
      for (std::size_t r = 0; r < 32; ++r)
        for (std::size_t col = 0; col < 48; ++col) {
          const double x = 10.3 + 0.5 * double(t);
          if (std::abs(double(col) - x) <= 2.5 && std::abs(double(r) - 15.6) <= 5.2) {
            r0 = std::min(r0, r);
            r1 = std::max(r1, r);
            c0 = std::min(c0, col);
            c1 = std::max(c1, col);
          }
        }
      ASSERT_EQ(f.meta.bboxes.size(), 1u);
      EXPECT_EQ(f.meta.bboxes[0], (BBox{c0, r0, c1 - c0 + 1, r1 - r0 + 1, "person"}));
    }
  }
}

TEST(GenerateCorpus, CannedCorpusInvariants) {
  test::TempDir dir("synth");
  const auto scenes = load_scenes(kCanned);
  const auto manifest = generate_corpus(scenes, Seed{7}, dir.path(), 3);
  std::size_t expected_clips = 0;
  for (const auto& s : scenes) expected_clips += s.clip_count();
  ASSERT_EQ(manifest.clips.size(), expected_clips);
  EXPECT_EQ(load_manifest(dir / "manifest.json").clips.size(), expected_clips);

  std::size_t clip_index = 0;
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const auto& spec = scenes[si];
    const auto profile = spec.speed_profile();
    for (std::size_t c = 0; c < spec.clip_count(); ++c, ++clip_index) {
      const auto& entry = manifest.clips[clip_index];
      EXPECT_EQ(entry.clip_id, spec.clip_id(c));
      EXPECT_EQ(entry.scenario_tags, spec.tags);
      EXPECT_EQ(validate_grid_file(entry.prediction).kind, GridFileKind::smap);
      for (const auto& f : entry.frames) {
        EXPECT_EQ(f.frame_id / kClipLength, c);  // frame i belongs to clip i/16
        const auto meta = load_frame_meta(f.meta);
        EXPECT_EQ(*meta.v_ego, profile[f.frame_id]);
        EXPECT_EQ(validate_grid_file(f.gaze).dims, spec.dims);
        EXPECT_EQ(validate_grid_file(f.nearness).kind, GridFileKind::smap);
        // Rasterization oracle for the semantic mask, every fourth frame.
        if (f.frame_id % 4 != 0) continue;
        const auto mask = load_bmsk(f.mask);
        const CategoryFilter keep;
        for (std::size_t r = 0; r < spec.dims.height; ++r)
          for (std::size_t col = 0; col < spec.dims.width; ++col) {
            bool covered = false;
            for (const auto& o : spec.objects) {
              if (!keep.keeps(o.class_name)) continue;
              const double dx = double(col) - (o.cx + o.vx * f.frame_id);
              const double dy = double(r) - (o.cy + o.vy * f.frame_id);
              const double hw = std::max(0.0, o.rx + o.gx * f.frame_id), hh = std::max(0.0, o.ry + o.gy * f.frame_id);
              covered |= o.shape == ShapeKind::rect ? (std::abs(dx) <= hw && std::abs(dy) <= hh)
                                                    : (dx * dx / (hw * hw) + dy * dy / (hh * hh) <= 1.0);
            }
            ASSERT_EQ(mask.at(r, col), covered ? 1 : 0) << entry.clip_id << " frame " << f.frame_id;
          }
      }
    }
  }
}

TEST(GenerateCorpus, ByteIdenticalAcrossRunsAndWorkerCounts) {
  test::TempDir a("synth_a"), b("synth_b");
  const auto scenes = load_scenes(kCanned);
  generate_corpus(scenes, Seed{99}, a.path(), 1);
  generate_corpus(scenes, Seed{99}, b.path(), 4);
  EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
}

TEST(GenerateCorpus, SeedChangesJitteredGaze) {
  test::TempDir a("synth_a"), b("synth_b");
  auto scenes = load_scenes(kCanned);
  scenes.resize(1);
  scenes[0].n_frames = 16;
  generate_corpus(scenes, Seed{1}, a.path());
  generate_corpus(scenes, Seed{2}, b.path());
  EXPECT_NE(test::read_bytes(a / "crossing_000/f0000/gaze.smap"), test::read_bytes(b / "crossing_000/f0000/gaze.smap"));
  EXPECT_EQ(test::read_bytes(a / "crossing_000/f0000/mask.bmsk"), test::read_bytes(b / "crossing_000/f0000/mask.bmsk"));
}

}  // namespace
}  // namespace sage
