#pragma once

#include <algorithm>
#include <vector>

#include "sage/grid.hpp"

namespace sage {

/// Scales so the maximum becomes 1. An all-zero map is returned unchanged.
inline SalMap normalize_max(const SalMap& map) {
  const double peak = grid_max(map);
  if (peak <= 0.0) return map;
  std::vector<float> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = static_cast<float>(static_cast<double>(map[i]) / peak);
  return SalMap(map.dims(), std::move(out));
}

/// Converts to a distribution over pixels. Throws DegenerateInputError on zero mass.
inline DensityMap normalize_sum(const SalMap& map) {
  const double mass = grid_sum(map);
  if (!(mass > 0.0)) throw DegenerateInputError("normalize_sum: map has zero mass");
  std::vector<double> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = static_cast<double>(map[i]) / mass;
  return DensityMap(map.dims(), std::move(out));
}

namespace detail {

// Align-corners source coordinate for output index i.
inline double source_coord(std::size_t i, std::size_t in, std::size_t out) {
  if (out <= 1 || in <= 1) return 0.0;
  return static_cast<double>(i) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
}

}  // namespace detail

/// Bilinear resampling with align-corners endpoint mapping: output corners
/// coincide with input corners. Identity when dims already match.
inline SalMap resize_bilinear(const SalMap& map, GridDims target) {
  if (!target.valid()) throw ValidationError("resize_bilinear: target dims must be >= 1, got " + to_string(target));
  if (target == map.dims()) return map;

  const std::size_t in_h = map.height();
  const std::size_t in_w = map.width();
  std::vector<float> out(target.area());
  for (std::size_t r = 0; r < target.height; ++r) {
    const double sy = detail::source_coord(r, in_h, target.height);
    const auto y0 = std::min(static_cast<std::size_t>(sy), in_h - 1);
    const auto y1 = std::min(y0 + 1, in_h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t c = 0; c < target.width; ++c) {
      const double sx = detail::source_coord(c, in_w, target.width);
      const auto x0 = std::min(static_cast<std::size_t>(sx), in_w - 1);
      const auto x1 = std::min(x0 + 1, in_w - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = map.at(y0, x0) * (1.0 - fx) + map.at(y0, x1) * fx;
      const double bottom = map.at(y1, x0) * (1.0 - fx) + map.at(y1, x1) * fx;
      out[r * target.width + c] = static_cast<float>(std::max(0.0, top * (1.0 - fy) + bottom * fy));
    }
  }
  return SalMap(target, std::move(out));
}

/// Nearest-neighbour resampling for masks (keeps values in {0,1}).
inline BinaryMask resize_nearest(const BinaryMask& mask, GridDims target) {
  if (!target.valid()) throw ValidationError("resize_nearest: target dims must be >= 1, got " + to_string(target));
  if (target == mask.dims()) return mask;
  std::vector<std::uint8_t> out(target.area());
  for (std::size_t r = 0; r < target.height; ++r) {
    const auto sr = std::min(static_cast<std::size_t>(r * mask.height() / target.height), mask.height() - 1);
    for (std::size_t c = 0; c < target.width; ++c) {
      const auto sc = std::min(static_cast<std::size_t>(c * mask.width() / target.width), mask.width() - 1);
      out[r * target.width + c] = mask.at(sr, sc);
    }
  }
  return BinaryMask(target, std::move(out));
}

}  // namespace sage
