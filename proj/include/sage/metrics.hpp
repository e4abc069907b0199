#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "sage/grid.hpp"
#include "sage/map_ops.hpp"

namespace sage {

enum class Direction { lower_better, higher_better };

struct MetricResult {
  std::string name;
  double value = 0.0;
  Direction direction = Direction::lower_better;
};

inline constexpr double kKlEpsilon = 1e-12;

/// KL(gt || pred) in nats with epsilon regularization. The ground truth is the
/// reference distribution, so mass the prediction misses (false negatives)
/// costs more than mass it adds (false positives).
inline MetricResult kl_div(const SalMap& pred, const SalMap& gt) {
  require_same_dims(pred.dims(), gt.dims(), "kl_div");
  const DensityMap p = normalize_sum(pred);
  const DensityMap q = normalize_sum(gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += q[i] * std::log(kKlEpsilon + q[i] / (p[i] + kKlEpsilon));
  return {"D_KL", std::max(0.0, sum), Direction::lower_better};
}

/// Pearson correlation, population convention.
inline MetricResult pearson_cc(const SalMap& pred, const SalMap& gt) {
  require_same_dims(pred.dims(), gt.dims(), "pearson_cc");
  const double ma = grid_mean(pred);
  const double mb = grid_mean(gt);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double da = pred[i] - ma;
    const double db = gt[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) throw DegenerateInputError("pearson_cc: correlation undefined for a constant map");
  const double n = static_cast<double>(pred.size());
  const double value = (cov / n) / (std::sqrt(va / n) * std::sqrt(vb / n));
  return {"CC", std::clamp(value, -1.0, 1.0), Direction::higher_better};
}

// ---------------------------------------------------------------------------
// Binarization

struct ThresholdPolicy {
  enum class Kind { fixed, adaptive };
  Kind kind = Kind::adaptive;
  double value = 2.0;  // threshold (fixed) or multiplier of the mean (adaptive)

  static ThresholdPolicy fixed(double t) { return {Kind::fixed, t}; }
  static ThresholdPolicy adaptive(double multiplier = 2.0) { return {Kind::adaptive, multiplier}; }

  void validate() const {
    if (kind == Kind::fixed && !(value >= 0.0 && value <= 1.0))
      throw ValidationError("fixed threshold must lie in [0,1]");
    if (kind == Kind::adaptive && !(value > 0.0)) throw ValidationError("adaptive multiplier must be > 0");
  }
};

inline double binarize_threshold(const SalMap& map, const ThresholdPolicy& policy) {
  if (policy.kind == ThresholdPolicy::Kind::fixed) return policy.value;
  return std::clamp(policy.value * grid_mean(map), 0.0, 1.0);
}

/// Foreground where value >= threshold. Zero-valued pixels are never foreground.
inline BinaryMask binarize(const SalMap& map, const ThresholdPolicy& policy) {
  policy.validate();
  const double tau = binarize_threshold(map, policy);
  std::vector<std::uint8_t> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = (map[i] > 0.0f && map[i] >= tau) ? 1 : 0;
  return BinaryMask(map.dims(), std::move(out));
}

// ---------------------------------------------------------------------------
// Semantic metrics

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

inline Confusion confusion(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_dims(pred.dims(), gt.dims(), "confusion");
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i], g = gt[i];
    if (p && g)
      ++c.tp;
    else if (p)
      ++c.fp;
    else if (g)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

struct FBetaResult {
  MetricResult f;
  double precision = 0.0;
  double recall = 0.0;
};

/// F-measure from confusion counts. Degenerate conventions: empty prediction and
/// empty ground truth score 1; a prediction firing on an empty ground truth scores 0.
inline FBetaResult f_beta(const Confusion& c, double beta2 = 1.0) {
  if (!(beta2 > 0.0)) throw ValidationError("f_beta: beta^2 must be > 0");
  const std::string name = beta2 == 1.0 ? "F1" : "F_beta";
  const std::size_t gt_pos = c.tp + c.fn;
  const std::size_t pred_pos = c.tp + c.fp;
  if (gt_pos == 0) {
    const double v = pred_pos == 0 ? 1.0 : 0.0;
    return {{name, v, Direction::higher_better}, v, v};
  }
  const double precision = pred_pos == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(pred_pos);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(gt_pos);
  const double denom = beta2 * precision + recall;
  const double f = denom > 0.0 ? (1.0 + beta2) * precision * recall / denom : 0.0;
  return {{name, f, Direction::higher_better}, precision, recall};
}

inline FBetaResult f_beta(const BinaryMask& pred_bin, const BinaryMask& gt_bin, double beta2 = 1.0) {
  return f_beta(confusion(pred_bin, gt_bin), beta2);
}

/// Mean absolute difference between a [0,1] prediction and a binary mask.
inline MetricResult mae(const SalMap& pred, const BinaryMask& gt_bin) {
  require_same_dims(pred.dims(), gt_bin.dims(), "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(static_cast<double>(pred[i]) - gt_bin[i]);
  return {"MAE", sum / static_cast<double>(pred.size()), Direction::lower_better};
}

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> kNames = {"D_KL", "CC", "F1", "MAE"};
  return kNames;
}

/// Dual-reference evaluation of one frame: fixation metrics against the
/// regime's fixation ground truth, semantic metrics against the object mask.
/// Returns [D_KL, CC, F1, MAE].
inline std::vector<MetricResult> evaluate_frame(const SalMap& pred, const SalMap& fixation_gt,
                                                const BinaryMask& semantic_gt, const ThresholdPolicy& policy) {
  require_same_dims(pred.dims(), fixation_gt.dims(), "evaluate_frame");
  require_same_dims(pred.dims(), semantic_gt.dims(), "evaluate_frame");
  return {kl_div(pred, fixation_gt), pearson_cc(pred, fixation_gt),
          f_beta(binarize(pred, policy), semantic_gt, 1.0).f, mae(pred, semantic_gt)};
}

}  // namespace sage
