// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "metric_oracle.hpp"
#include "sage/sage.hpp"
#include "test_support.hpp"

namespace {

using namespace sage;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kCanned = fs::path(SAGE_SOURCE_DIR) / "scenes" / "canned.scene";

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail << what << "; ";
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> as_doubles(const SalMap& m) { return {m.values().begin(), m.values().end()}; }

std::vector<int> as_ints(const BinaryMask& m) { return {m.values().begin(), m.values().end()}; }

int run_cli(const std::string& args) {
  const int status = std::system((std::string(SAGENET_BIN) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = test::read_bytes(e.path());
  return out;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void operator_exactness(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(11);
  const GridDims d{8, 8};
  for (int trial = 0; trial < 200; ++trial) {
    const auto y = test::random_map(rng, d);
    const auto zero = depth_boost(y, SalMap::zeros(d));
    o.require(std::memcmp(zero.values().data(), y.values().data(), d.area() * sizeof(float)) == 0,
              "zero nearness changed the input");
    const auto twice = depth_boost(y, SalMap(d, 1.0f));
    for (std::size_t i = 0; i < d.area(); ++i) {
      const float want = 2.0f * y[i];
      o.require(twice[i] == want || std::nextafter(twice[i], want) == want, "unit nearness is not 2x within 1 ulp");
    }
    const auto n = test::random_map(rng, d);
    const auto out = depth_boost(y, n);
    for (std::size_t i = 0; i < d.area(); ++i)
      o.require(std::abs(out[i] - (double(y[i]) * n[i] + y[i])) <= 1e-7, "depth_boost differs from oracle");

    const std::vector<BBox> boxes = {{1, 2, 3, 3, "person"}, {5, 0, 2, 4, "person"}};
    o.require(bbox_amplify(y, boxes, 1.0) == y, "k=1 is not the identity");
    const auto amp = bbox_amplify(y, boxes, 2.0);
    double in0 = 0, out0 = 0, in1 = 0, out1 = 0;
    std::size_t nin = 0, nout = 0;
    for (std::size_t r = 0; r < d.height; ++r)
      for (std::size_t c = 0; c < d.width; ++c) {
        const bool inside = boxes[0].contains(r, c) || boxes[1].contains(r, c);
        const std::size_t i = r * d.width + c;
        (inside ? in0 : out0) += y[i];
        (inside ? in1 : out1) += amp[i];
        ++(inside ? nin : nout);
      }
    const double before = (in0 / nin) / (out0 / nout), after = (in1 / nin) / (out1 / nout);
    o.require(std::abs(after / before - 4.0) <= 1e-6, "in/out ratio is not k^2");
  }
  const double secs = seconds_since(t0);
  o.require(secs < 1.0, "runtime over 1 s");
  o.detail << "200 random 8x8 cases, " << secs << " s";
}

void gating(Outcome& o) {
  const GridDims d{4, 4};
  auto clip = [](double v) {
    std::vector<FrameRecord> frames(kClipLength);
    for (std::uint64_t i = 0; i < kClipLength; ++i) {
      frames[i].meta.frame_id = i;
      frames[i].meta.v_ego = v;
    }
    return ClipWindow("gate", std::move(frames));
  };
  struct Case {
    double v;
    Intent intent;
    std::size_t intent_calls, detector_calls;
  };
  for (const Case& c : {Case{40.0, Intent::crossing, 0, 0}, Case{15.0001, Intent::crossing, 0, 0},
                        Case{15.0, Intent::not_crossing, 1, 0}, Case{3.0, Intent::unknown, 1, 0},
                        Case{3.0, Intent::crossing, 1, 1}}) {
    auto intent = std::make_shared<Counting<IntentProvider>>(std::make_shared<ScriptedIntent>(c.intent));
    auto detector = std::make_shared<Counting<DetectorProvider>>(
        std::make_shared<FixedDetector>(std::vector<BBox>{{0, 0, 2, 2, "person"}}));
    const ProviderBundle bundle{std::make_shared<ConstantSaliency>(SalMap(d, 0.5f)),
                                std::make_shared<ConstantNearness>(SalMap(d, 0.0f)), intent, detector};
    run_sage_net(clip(c.v), bundle, PipelineConfig{});
    o.require(intent->calls() == c.intent_calls && detector->calls() == c.detector_calls,
              "unexpected provider calls at v_ego=" + std::to_string(c.v));
  }
  o.detail << "5 gating cases, exact call counts";
}

void sage_contract(Outcome& o) {
  auto scenes = load_scenes(kCanned);
  const CategoryFilter filter;
  std::size_t frames = 0, mask_pixels = 0;
  for (std::uint64_t t = 0; frames < 100; ++t) {
    const std::size_t si = t % scenes.size();
    const auto& spec = scenes[si];
    const std::uint64_t ft = t % spec.n_frames;
    const auto frame = render_frame(spec, si, ft, Seed{2024});
    std::vector<InstanceDetection> instances;
    for (const auto& obj : spec.objects) {
      std::vector<std::uint8_t> m(spec.dims.area());
      for (std::size_t r = 0; r < spec.dims.height; ++r)
        for (std::size_t c = 0; c < spec.dims.width; ++c) m[r * spec.dims.width + c] = obj.covers(ft, r, c);
      instances.push_back({obj.class_name, BinaryMask(spec.dims, std::move(m)), 0.9});
    }
    const auto out = build_sage_frame(frame.gaze, instances, filter);
    const auto norm = normalize_max(frame.gaze);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (frame.mask[i]) {
        ++mask_pixels;
        o.require(out[i] == 1.0f, "mask pixel is not exactly 1");
      } else {
        o.require(out[i] == norm[i], "non-mask pixel differs from normalized gaze");
      }
    }
    ++frames;
  }
  o.detail << frames << " frames, " << mask_pixels << " mask pixels";
}

void metric_oracle(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(8080);
  const GridDims d{8, 8};
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto pred = normalize_max(test::random_map(rng, d));
    const auto gt = test::random_map(rng, d);
    const auto sem = test::random_mask(rng, d, 0.3);
    const auto r = evaluate_frame(pred, gt, sem, ThresholdPolicy::adaptive());
    const auto p = as_doubles(pred), g = as_doubles(gt);
    const double ref[4] = {oracle::kl(p, g), oracle::cc(p, g), oracle::f1(oracle::threshold_adaptive(p, 2.0), as_ints(sem)),
                           oracle::mae(p, as_ints(sem))};
    for (int m = 0; m < 4; ++m) worst = std::max(worst, std::abs(r[m].value - ref[m]));
    o.require(kl_div(pred, pred).value <= 1e-6, "KL(p,p) > 1e-6");
    o.require(pearson_cc(pred, gt).value == pearson_cc(gt, pred).value, "CC not symmetric");
  }
  o.require(worst <= 1e-6, "oracle mismatch");

  // F1 vs harmonic mean over every confusion table with tp+fp+fn > 0, up to 12 each.
  for (std::size_t tp = 0; tp <= 12; ++tp)
    for (std::size_t fp = 0; fp <= 12; ++fp)
      for (std::size_t fn = 0; fn <= 12; ++fn) {
        if (tp + fp + fn == 0) continue;
        const auto f = f_beta(Confusion{tp, fp, fn, 0}, 1.0);
        const double hm = tp == 0 ? 0.0 : 2.0 / (double(tp + fp) / tp + double(tp + fn) / tp);
        o.require(std::abs(f.f.value - hm) <= 1e-12, "F1 is not the harmonic mean");
      }
  const double secs = seconds_since(t0);
  o.require(secs < 5.0, "runtime over 5 s");
  o.detail << "max deviation " << worst << ", " << secs << " s";
}

void kl_asymmetry(Outcome& o) {
  auto row = [](std::initializer_list<float> v) { return SalMap({1, v.size()}, std::vector<float>(v)); };
  const auto gt = row({0.98f, 0.01f, 0.01f});
  const double fn = kl_div(row({0.01f, 0.495f, 0.495f}), gt).value;
  const double fp = kl_div(row({0.495f, 0.495f, 0.01f}), gt).value;
  o.require(fn > fp, "KL(FN) <= KL(FP)");
  const double two = kl_div(row({0.9f, 0.1f}), row({0.5f, 0.5f})).value;
  o.require(std::abs(two - 0.5108) <= 1e-3, "two-pixel example off");
  o.detail << "KL(FN)=" << fn << " KL(FP)=" << fp << " two-pixel=" << two;
}

void crossing_end_to_end(Outcome& o) {
  const auto t0 = Clock::now();
  auto scenes = load_scenes(kCanned);
  std::erase_if(scenes, [](const SceneSpec& s) { return s.name != "crossing"; });
  if (scenes.size() != 1) {
    o.require(false, "no crossing scene");
    return;
  }
  test::TempDir dir("accept_crossing");
  const auto manifest = generate_corpus(scenes, Seed{1}, dir.path(), 1);
  o.require(manifest.clips.size() >= 10, "fewer than 10 clips");
  o.require(manifest.dims == GridDims{128, 256}, "dims are not 128x256");

  EvalOptions opt;
  opt.regimes = {Regime::sage};
  opt.workers = 1;
  const auto result = evaluate_corpus(manifest, PipelineConfig{}, ThresholdPolicy::adaptive(), opt);
  o.require(result.failures.empty(), "clips failed");
  o.require(result.rows.size() == 2 * manifest.clips.size(), "missing rows");

  // Cross-check the harness F1 with the brute-force oracle, then compare pipelines.
  const auto providers = file_providers(manifest.dims);
  double gain = 0, min_gain = 1e9;
  for (std::size_t c = 0; c < manifest.clips.size() && result.rows.size() == 2 * manifest.clips.size(); ++c) {
    const auto clip = open_clip(manifest.clips[c]);
    const auto raw = as_doubles(normalize_max(load_smap(manifest.clips[c].prediction)));
    const auto composed = as_doubles(run_sage_net(clip, providers, PipelineConfig{}));
    double f_raw = 0, f_net = 0;
    for (const auto& f : manifest.clips[c].frames) {
      const auto mask = as_ints(load_bmsk(f.mask));
      f_raw += oracle::f1(oracle::threshold_adaptive(raw, 2.0), mask) / kClipLength;
      f_net += oracle::f1(oracle::threshold_adaptive(composed, 2.0), mask) / kClipLength;
    }
    const auto& raw_row = result.rows[2 * c];
    const auto& net_row = result.rows[2 * c + 1];
    o.require(raw_row.pipeline == Pipeline::raw && net_row.pipeline == Pipeline::sage_net, "row order");
    o.require(std::abs(raw_row.values[2] - f_raw) <= 1e-6 && std::abs(net_row.values[2] - f_net) <= 1e-6,
              "harness F1 differs from oracle");
    o.require(net_row.values[2] > raw_row.values[2], "sage_net F1 not above raw on " + raw_row.clip_id);
    gain += (net_row.values[2] - raw_row.values[2]) / double(manifest.clips.size());
    min_gain = std::min(min_gain, net_row.values[2] - raw_row.values[2]);
  }
  o.require(gain > 0, "mean improvement not positive");
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "runtime over 60 s");
  o.detail << manifest.clips.size() << " clips, mean F1 gain " << gain << ", min gain " << min_gain << ", " << secs
           << " s";
}

void determinism(Outcome& o) {
  test::TempDir dir("accept_det");
  const std::string gen = "synth-gen --spec " + q(kCanned) + " --seed 424242 --out ";
  o.require(run_cli(gen + q(dir / "a")) == 0 && run_cli(gen + q(dir / "b") + " --workers 3") == 0, "synth-gen failed");
  const auto a = snapshot(dir / "a"), b = snapshot(dir / "b");
  o.require(!a.empty() && a == b, "synth-gen trees differ");

  const std::string eval = "eval --manifest " + q(dir / "a" / "manifest.json") + " --report ";
  o.require(run_cli(eval + q(dir / "r1.csv") + " --workers 1") == 0 &&
                run_cli(eval + q(dir / "r8.csv") + " --workers 8") == 0,
            "eval failed");
  o.require(run_cli(eval + q(dir / "r1.md") + " --workers 1 --format markdown") == 0 &&
                run_cli(eval + q(dir / "r8.md") + " --workers 8 --format markdown") == 0,
            "eval failed");
  o.require(test::read_bytes(dir / "r1.csv") == test::read_bytes(dir / "r8.csv"), "csv reports differ");
  o.require(test::read_bytes(dir / "r1.md") == test::read_bytes(dir / "r8.md"), "markdown reports differ");
  o.detail << a.size() << " files identical; reports identical at 1 and 8 workers";
}

void format_round_trip(Outcome& o) {
  test::TempDir dir("accept_rt");
  std::mt19937_64 rng(1000);
  std::uniform_int_distribution<std::size_t> side(1, 24);
  for (int i = 0; i < 1000; ++i) {
    const GridDims d{side(rng), side(rng)};
    std::vector<float> v(d.area());
    for (auto& x : v) {
      // Any finite non-negative bit pattern, including subnormals and large values.
      std::uint32_t bits = static_cast<std::uint32_t>(rng()) & 0x7fffffffu;
      if ((bits >> 23) == 0xff) bits &= 0x7f7fffffu;
      std::memcpy(&x, &bits, sizeof x);
    }
    const SalMap m(d, v);
    const auto path = dir / "m.smap";
    save_smap(m, path);
    const auto back = load_smap(path);
    o.require(back.dims() == d && std::memcmp(back.values().data(), v.data(), v.size() * sizeof(float)) == 0,
              "map " + std::to_string(i) + " changed");
  }
  o.detail << "1000 maps bit-exact";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"operator exactness", operator_exactness},
      {"pipeline gating", gating},
      {"sage ground-truth contract", sage_contract},
      {"metric oracle equivalence", metric_oracle},
      {"kl asymmetry", kl_asymmetry},
      {"end-to-end crossing scenario", crossing_end_to_end},
      {"determinism", determinism},
      {"format round-trip", format_round_trip},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      check(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << o.detail.str() << ")" << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
