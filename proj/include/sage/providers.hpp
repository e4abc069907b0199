#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sage/fusion.hpp"
#include "sage/smap_io.hpp"

namespace sage {

// ---------------------------------------------------------------------------
// File-backed providers. They read the artifacts an offline exporter (or the
// synthetic generator) left next to the clip and resize maps to the working dims.

class FileSaliencyProvider final : public SaliencyProvider {
 public:
  explicit FileSaliencyProvider(std::optional<GridDims> dims = std::nullopt) : dims_(dims) {}
  std::string name() const override { return "file-saliency"; }
  SalMap predict(const ClipWindow& clip) override {
    if (clip.prediction().empty()) throw ValidationError("clip '" + clip.clip_id() + "' names no prediction artifact");
    SalMap y = load_smap(clip.prediction());
    return dims_ ? resize_bilinear(y, *dims_) : y;
  }

 private:
  std::optional<GridDims> dims_;
};

class FileNearnessProvider final : public NearnessProvider {
 public:
  explicit FileNearnessProvider(std::optional<GridDims> dims = std::nullopt) : dims_(dims) {}
  std::string name() const override { return "file-nearness"; }
  SalMap nearness(const FrameRecord& frame) override {
    SalMap d = load_smap(frame.nearness);
    if (grid_max(d) > 1.0f) throw ValidationError(frame.nearness.string() + ": nearness values must lie in [0,1]");
    return dims_ ? resize_bilinear(d, *dims_) : d;
  }

 private:
  std::optional<GridDims> dims_;
};

/// Reads the intent label carried by the clip's last frame. An "unknown" label
/// is reported as not_crossing.
class FileIntentProvider final : public IntentProvider {
 public:
  std::string name() const override { return "file-intent"; }
  Intent intent(const ClipWindow& clip) override {
    return clip.last().meta.intent == Intent::crossing ? Intent::crossing : Intent::not_crossing;
  }
};

class FileDetectorProvider final : public DetectorProvider {
 public:
  std::string name() const override { return "file-detector"; }
  std::vector<BBox> detect(const FrameRecord& frame) override { return frame.meta.bboxes; }
};

inline ProviderBundle file_providers(std::optional<GridDims> dims = std::nullopt) {
  return {std::make_shared<FileSaliencyProvider>(dims), std::make_shared<FileNearnessProvider>(dims),
          std::make_shared<FileIntentProvider>(), std::make_shared<FileDetectorProvider>()};
}

// ---------------------------------------------------------------------------
// Stubs for tests.

class ConstantSaliency final : public SaliencyProvider {
 public:
  explicit ConstantSaliency(SalMap map) : map_(std::move(map)) {}
  std::string name() const override { return "constant-saliency"; }
  SalMap predict(const ClipWindow&) override { return map_; }

 private:
  SalMap map_;
};

class ConstantNearness final : public NearnessProvider {
 public:
  explicit ConstantNearness(SalMap map) : map_(std::move(map)) {}
  std::string name() const override { return "constant-nearness"; }
  SalMap nearness(const FrameRecord&) override { return map_; }

 private:
  SalMap map_;
};

class ScriptedIntent final : public IntentProvider {
 public:
  explicit ScriptedIntent(Intent value) : value_(value) {}
  std::string name() const override { return "scripted-intent"; }
  Intent intent(const ClipWindow&) override { return value_; }

 private:
  Intent value_;
};

class FixedDetector final : public DetectorProvider {
 public:
  explicit FixedDetector(std::vector<BBox> boxes) : boxes_(std::move(boxes)) {}
  std::string name() const override { return "fixed-detector"; }
  std::vector<BBox> detect(const FrameRecord&) override { return boxes_; }

 private:
  std::vector<BBox> boxes_;
};

/// Always throws; used to check failure propagation.
class FailingSaliency final : public SaliencyProvider {
 public:
  std::string name() const override { return "failing-saliency"; }
  SalMap predict(const ClipWindow&) override { throw IoError("model output unavailable"); }
};

/// Forwards to an inner provider and counts calls.
template <typename Base>
class Counting;

#define SAGE_COUNTING_PROVIDER(Base, Method, Ret, Arg)                                          \
  template <>                                                                                  \
  class Counting<Base> final : public Base {                                                   \
   public:                                                                                     \
    explicit Counting(std::shared_ptr<Base> inner) : inner_(std::move(inner)) {}               \
    std::string name() const override { return inner_->name(); }                              \
    bool concurrent_safe() const noexcept override { return inner_->concurrent_safe(); }       \
    Ret Method(const Arg& a) override {                                                        \
      ++calls_;                                                                                \
      return inner_->Method(a);                                                                \
    }                                                                                          \
    std::size_t calls() const noexcept { return calls_.load(); }                               \
                                                                                               \
   private:                                                                                    \
    std::shared_ptr<Base> inner_;                                                              \
    std::atomic<std::size_t> calls_{0};                                                        \
  };

SAGE_COUNTING_PROVIDER(SaliencyProvider, predict, SalMap, ClipWindow)
SAGE_COUNTING_PROVIDER(NearnessProvider, nearness, SalMap, FrameRecord)
SAGE_COUNTING_PROVIDER(IntentProvider, intent, Intent, ClipWindow)
SAGE_COUNTING_PROVIDER(DetectorProvider, detect, std::vector<BBox>, FrameRecord)

#undef SAGE_COUNTING_PROVIDER

}  // namespace sage
