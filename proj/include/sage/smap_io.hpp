#pragma once

// SMAP / BMSK interchange format, all fields little-endian:
//
//   offset 0   4 bytes  magic, "SMAP" (saliency map) or "BMSK" (binary mask)
//   offset 4   u32      format version, currently 1
//   offset 8   u32      height
//   offset 12  u32      width
//   offset 16  f32 x height*width, row-major
//
// BMSK payload values are restricted to 0.0 and 1.0.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "sage/grid.hpp"

namespace sage {

inline constexpr std::uint32_t kGridFormatVersion = 1;
inline constexpr std::size_t kGridHeaderBytes = 16;

enum class GridFileKind { smap, bmsk };

struct GridFileInfo {
  GridFileKind kind;
  GridDims dims;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[off + i]) << (8 * i);
  return v;
}

inline std::string_view magic_for(GridFileKind kind) { return kind == GridFileKind::smap ? "SMAP" : "BMSK"; }

inline std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

inline void write_all(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

template <typename T>
std::vector<std::uint8_t> encode_grid(const Grid<T>& g, GridFileKind kind) {
  std::vector<std::uint8_t> out;
  out.reserve(kGridHeaderBytes + 4 * g.size());
  for (char c : magic_for(kind)) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, kGridFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(g.height()));
  put_u32(out, static_cast<std::uint32_t>(g.width()));
  for (T v : g.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

struct DecodedHeader {
  GridFileKind kind;
  GridDims dims;
};

inline DecodedHeader decode_header(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw FormatError("truncated header: missing magic", bytes.size());
  const std::string_view magic(reinterpret_cast<const char*>(bytes.data()), 4);
  GridFileKind kind;
  if (magic == "SMAP")
    kind = GridFileKind::smap;
  else if (magic == "BMSK")
    kind = GridFileKind::bmsk;
  else
    throw FormatError("bad magic, expected SMAP or BMSK", 0);
  if (bytes.size() < kGridHeaderBytes) throw FormatError("truncated header", bytes.size());
  if (const auto version = get_u32(bytes, 4); version != kGridFormatVersion)
    throw FormatError("unsupported format version " + std::to_string(version), 4);
  const GridDims dims{get_u32(bytes, 8), get_u32(bytes, 12)};
  if (dims.height == 0) throw FormatError("height must be >= 1", 8);
  if (dims.width == 0) throw FormatError("width must be >= 1", 12);
  const std::size_t payload = bytes.size() - kGridHeaderBytes;
  const std::uint64_t expected = static_cast<std::uint64_t>(dims.area()) * 4;
  if (payload != expected)
    throw FormatError("payload length mismatch: " + to_string(dims) + " needs " + std::to_string(expected) +
                          " bytes, found " + std::to_string(payload),
                      payload < expected ? bytes.size() : kGridHeaderBytes + expected);
  return {kind, dims};
}

inline float payload_float(const std::vector<std::uint8_t>& bytes, std::size_t i) {
  return std::bit_cast<float>(get_u32(bytes, kGridHeaderBytes + 4 * i));
}

}  // namespace detail

inline void save_smap(const SalMap& map, const std::filesystem::path& path) {
  detail::write_all(path, detail::encode_grid(map, GridFileKind::smap));
}

inline void save_bmsk(const BinaryMask& mask, const std::filesystem::path& path) {
  detail::write_all(path, detail::encode_grid(mask, GridFileKind::bmsk));
}

/// In-memory encoding, byte-identical to what save_smap writes.
inline std::vector<std::uint8_t> encode_smap(const SalMap& map) { return detail::encode_grid(map, GridFileKind::smap); }

inline SalMap decode_smap(const std::vector<std::uint8_t>& bytes) {
  const auto header = detail::decode_header(bytes);
  if (header.kind != GridFileKind::smap) throw FormatError("expected SMAP magic, found BMSK", 0);
  std::vector<float> data(header.dims.area());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float v = detail::payload_float(bytes, i);
    const auto offset = kGridHeaderBytes + 4 * i;
    if (!std::isfinite(v)) throw FormatError("non-finite value", offset);
    if (v < 0.0f) throw FormatError("negative value", offset);
    data[i] = v;
  }
  return SalMap(header.dims, std::move(data));
}

inline BinaryMask decode_bmsk(const std::vector<std::uint8_t>& bytes) {
  const auto header = detail::decode_header(bytes);
  if (header.kind != GridFileKind::bmsk) throw FormatError("expected BMSK magic, found SMAP", 0);
  std::vector<std::uint8_t> data(header.dims.area());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float v = detail::payload_float(bytes, i);
    if (v == 0.0f)
      data[i] = 0;
    else if (v == 1.0f)
      data[i] = 1;
    else
      throw FormatError("mask value must be 0.0 or 1.0", kGridHeaderBytes + 4 * i);
  }
  return BinaryMask(header.dims, std::move(data));
}

inline SalMap load_smap(const std::filesystem::path& path) {
  try {
    return decode_smap(detail::read_all(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.reason(), e.offset());
  }
}

inline BinaryMask load_bmsk(const std::filesystem::path& path) {
  try {
    return decode_bmsk(detail::read_all(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.reason(), e.offset());
  }
}

/// Fully validates a SMAP or BMSK file and reports its kind and dims.
inline GridFileInfo validate_grid_file(const std::filesystem::path& path) {
  auto bytes = detail::read_all(path);
  const auto header = detail::decode_header(bytes);
  if (header.kind == GridFileKind::smap)
    (void)decode_smap(bytes);
  else
    (void)decode_bmsk(bytes);
  return {header.kind, header.dims};
}

}  // namespace sage
