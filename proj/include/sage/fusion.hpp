#pragma once

#include <algorithm>
#include <exception>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "sage/clip.hpp"
#include "sage/grid.hpp"
#include "sage/map_ops.hpp"

namespace sage {

// ---------------------------------------------------------------------------
// Operators

/// Depth amplification: Y * D + Y, with D a nearness map in [0,1] (1 = nearest).
/// The result is left unnormalized and may exceed 1.
inline SalMap depth_boost(const SalMap& prediction, const SalMap& nearness) {
  require_same_dims(prediction.dims(), nearness.dims(), "depth_boost");
  std::vector<float> out(prediction.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = nearness[i];
    if (d > 1.0) throw ValidationError("depth_boost: nearness value " + std::to_string(d) + " outside [0,1]");
    const double y = prediction[i];
    out[i] = static_cast<float>(y * d + y);
  }
  return SalMap(prediction.dims(), std::move(out));
}

/// Pedestrian amplification: x k inside the union of boxes, x 1/k everywhere else.
inline SalMap bbox_amplify(const SalMap& prediction, const std::vector<BBox>& bboxes, double k) {
  if (!(k >= 1.0)) throw ValidationError("bbox_amplify: amplification factor must be >= 1");
  for (const auto& b : bboxes) require_fits(b, prediction.dims());
  const double inv = 1.0 / k;
  std::vector<float> out(prediction.size());
  for (std::size_t r = 0; r < prediction.height(); ++r) {
    for (std::size_t c = 0; c < prediction.width(); ++c) {
      const bool inside = std::any_of(bboxes.begin(), bboxes.end(), [&](const BBox& b) { return b.contains(r, c); });
      const double y = prediction.at(r, c);
      out[r * prediction.width() + c] = static_cast<float>(inside ? y * k : y * inv);
    }
  }
  return SalMap(prediction.dims(), std::move(out));
}

// ---------------------------------------------------------------------------
// Configuration

enum class ClampPolicy { renormalize_max, clip_at_one, none };

inline std::string_view to_string(ClampPolicy p) {
  switch (p) {
    case ClampPolicy::renormalize_max: return "renormalize_max";
    case ClampPolicy::clip_at_one: return "clip_at_one";
    case ClampPolicy::none: break;
  }
  return "none";
}

inline ClampPolicy parse_clamp_policy(std::string_view s) {
  if (s == "renormalize_max") return ClampPolicy::renormalize_max;
  if (s == "clip_at_one") return ClampPolicy::clip_at_one;
  if (s == "none") return ClampPolicy::none;
  throw ValidationError("unknown clamp policy '" + std::string(s) + "'");
}

struct PipelineConfig {
  double v_thresh = 15.0;  // km/h
  double k = 2.0;
  ClampPolicy clamp_policy = ClampPolicy::renormalize_max;

  void validate() const {
    if (!(v_thresh >= 0.0)) throw ValidationError("v_thresh must be >= 0");
    if (!(k > 1.0)) throw ValidationError("amplification factor k must be > 1");
  }
};

inline SalMap finalize(const SalMap& map, ClampPolicy policy) {
  switch (policy) {
    case ClampPolicy::renormalize_max: return normalize_max(map);
    case ClampPolicy::clip_at_one: {
      std::vector<float> out(map.values().begin(), map.values().end());
      for (auto& v : out) v = std::min(v, 1.0f);
      return SalMap(map.dims(), std::move(out));
    }
    case ClampPolicy::none: break;
  }
  return map;
}

// ---------------------------------------------------------------------------
// Providers
//
// Each provider reports whether concurrent calls are safe. Orchestrators that
// fan out across threads wrap unsafe providers with serialize().

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string name() const = 0;
  virtual bool concurrent_safe() const noexcept { return true; }
};

class SaliencyProvider : public Provider {
 public:
  virtual SalMap predict(const ClipWindow& clip) = 0;
};

class NearnessProvider : public Provider {
 public:
  virtual SalMap nearness(const FrameRecord& frame) = 0;
};

class IntentProvider : public Provider {
 public:
  /// Returns crossing or not_crossing.
  virtual Intent intent(const ClipWindow& clip) = 0;
};

class DetectorProvider : public Provider {
 public:
  virtual std::vector<BBox> detect(const FrameRecord& frame) = 0;
};

struct ProviderBundle {
  std::shared_ptr<SaliencyProvider> saliency;
  std::shared_ptr<NearnessProvider> nearness;
  std::shared_ptr<IntentProvider> intent;
  std::shared_ptr<DetectorProvider> detector;
};

namespace detail {

// Runs a provider call, tagging any failure with the provider's identity.
template <typename F>
auto call_provider(const Provider& p, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ProviderError&) {
    throw;
  } catch (const Error& e) {
    throw ProviderError(e.kind(), p.name(), e.what());
  } catch (const std::exception& e) {
    throw ProviderError(ErrorKind::io, p.name(), e.what());
  }
}

template <typename Base>
class Serialized;

template <>
class Serialized<SaliencyProvider> final : public SaliencyProvider {
 public:
  explicit Serialized(std::shared_ptr<SaliencyProvider> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  SalMap predict(const ClipWindow& clip) override {
    std::lock_guard lock(mutex_);
    return inner_->predict(clip);
  }

 private:
  std::shared_ptr<SaliencyProvider> inner_;
  std::mutex mutex_;
};

template <>
class Serialized<NearnessProvider> final : public NearnessProvider {
 public:
  explicit Serialized(std::shared_ptr<NearnessProvider> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  SalMap nearness(const FrameRecord& frame) override {
    std::lock_guard lock(mutex_);
    return inner_->nearness(frame);
  }

 private:
  std::shared_ptr<NearnessProvider> inner_;
  std::mutex mutex_;
};

template <>
class Serialized<IntentProvider> final : public IntentProvider {
 public:
  explicit Serialized(std::shared_ptr<IntentProvider> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  Intent intent(const ClipWindow& clip) override {
    std::lock_guard lock(mutex_);
    return inner_->intent(clip);
  }

 private:
  std::shared_ptr<IntentProvider> inner_;
  std::mutex mutex_;
};

template <>
class Serialized<DetectorProvider> final : public DetectorProvider {
 public:
  explicit Serialized(std::shared_ptr<DetectorProvider> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  std::vector<BBox> detect(const FrameRecord& frame) override {
    std::lock_guard lock(mutex_);
    return inner_->detect(frame);
  }

 private:
  std::shared_ptr<DetectorProvider> inner_;
  std::mutex mutex_;
};

template <typename Base>
std::shared_ptr<Base> serialize_one(std::shared_ptr<Base> p) {
  if (!p || p->concurrent_safe()) return p;
  return std::make_shared<Serialized<Base>>(std::move(p));
}

}  // namespace detail

/// Wraps every provider that is not safe for concurrent calls behind a mutex.
inline ProviderBundle serialize(ProviderBundle b) {
  return {detail::serialize_one(std::move(b.saliency)), detail::serialize_one(std::move(b.nearness)),
          detail::serialize_one(std::move(b.intent)), detail::serialize_one(std::move(b.detector))};
}

// ---------------------------------------------------------------------------
// Orchestrator

/// Which branch of the composition produced the output.
enum class PipelineBranch { speed_gate, not_crossing, pedestrian_amplified };

struct PipelineTrace {
  PipelineBranch branch = PipelineBranch::speed_gate;
  std::size_t bbox_count = 0;
};

/// Full composition for one clip:
///   Y  = saliency(clip), D = nearness(last frame), Yd = depth_boost(Y, D)
///   fast ego (v_ego > v_thresh)      -> finalize(Yd)
///   slow ego, intent = not_crossing  -> finalize(Yd)
///   slow ego, crossing               -> finalize(bbox_amplify(Yd, persons(last), k))
/// The intent provider is only consulted on the slow path and the detector only
/// when a crossing is predicted.
inline SalMap run_sage_net(const ClipWindow& clip, const ProviderBundle& providers, const PipelineConfig& config,
                           PipelineTrace* trace = nullptr) {
  config.validate();
  if (!providers.saliency || !providers.nearness || !providers.intent || !providers.detector)
    throw ValidationError("run_sage_net: provider bundle is incomplete");

  const FrameRecord& last = clip.last();
  if (!last.meta.v_ego)
    throw ValidationError("clip '" + clip.clip_id() + "': last frame " + std::to_string(last.meta.frame_id) +
                          " has no v_ego");

  const SalMap y = detail::call_provider(*providers.saliency, [&] { return providers.saliency->predict(clip); });
  const SalMap d = detail::call_provider(*providers.nearness, [&] { return providers.nearness->nearness(last); });
  const SalMap yd = depth_boost(y, d);

  PipelineTrace local;
  PipelineTrace& t = trace ? *trace : local;

  if (*last.meta.v_ego > config.v_thresh) {
    t = {PipelineBranch::speed_gate, 0};
    return finalize(yd, config.clamp_policy);
  }
  const Intent intent = detail::call_provider(*providers.intent, [&] { return providers.intent->intent(clip); });
  if (intent != Intent::crossing) {
    t = {PipelineBranch::not_crossing, 0};
    return finalize(yd, config.clamp_policy);
  }

  std::vector<BBox> persons =
      detail::call_provider(*providers.detector, [&] { return providers.detector->detect(last); });
  std::erase_if(persons, [](const BBox& b) { return b.class_name != "person"; });
  t = {PipelineBranch::pedestrian_amplified, persons.size()};
  return finalize(bbox_amplify(yd, persons, config.k), config.clamp_policy);
}

}  // namespace sage
