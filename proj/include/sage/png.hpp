#pragma once

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "sage/grid.hpp"
#include "sage/smap_io.hpp"

namespace sage {

/// 8-bit grey levels: round(255 * v / max). An all-zero map maps to all zeros.
inline std::vector<std::uint8_t> heatmap_levels(const SalMap& map) {
  const double peak = grid_max(map);
  std::vector<std::uint8_t> px(map.size(), 0);
  if (peak <= 0.0) return px;
  for (std::size_t i = 0; i < map.size(); ++i)
    px[i] = static_cast<std::uint8_t>(std::lround(255.0 * static_cast<double>(map[i]) / peak));
  return px;
}

namespace detail {

inline void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void png_chunk(std::vector<std::uint8_t>& out, std::string_view type, const std::vector<std::uint8_t>& data) {
  put_u32_be(out, static_cast<std::uint32_t>(data.size()));
  const auto type_at = out.size();
  for (char c : type) out.push_back(static_cast<std::uint8_t>(c));
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = ::crc32(0L, out.data() + type_at, static_cast<uInt>(out.size() - type_at));
  put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

/// Encodes an 8-bit greyscale PNG (filter type 0 on every scanline).
inline std::vector<std::uint8_t> encode_gray_png(GridDims dims, const std::vector<std::uint8_t>& levels) {
  std::vector<std::uint8_t> raw;
  raw.reserve(dims.height * (dims.width + 1));
  for (std::size_t r = 0; r < dims.height; ++r) {
    raw.push_back(0);
    raw.insert(raw.end(), levels.begin() + static_cast<std::ptrdiff_t>(r * dims.width),
               levels.begin() + static_cast<std::ptrdiff_t>((r + 1) * dims.width));
  }
  uLongf packed_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_len);
  if (compress2(packed.data(), &packed_len, raw.data(), static_cast<uLong>(raw.size()), Z_BEST_COMPRESSION) != Z_OK)
    throw IoError("zlib compression failed");
  packed.resize(packed_len);

  std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  detail::put_u32_be(ihdr, static_cast<std::uint32_t>(dims.width));
  detail::put_u32_be(ihdr, static_cast<std::uint32_t>(dims.height));
  ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});  // depth 8, greyscale, deflate, filter 0, no interlace
  detail::png_chunk(png, "IHDR", ihdr);
  detail::png_chunk(png, "IDAT", packed);
  detail::png_chunk(png, "IEND", {});
  return png;
}

inline void export_heatmap_png(const SalMap& map, const std::filesystem::path& path) {
  detail::write_all(path, encode_gray_png(map.dims(), heatmap_levels(map)));
}

}  // namespace sage
