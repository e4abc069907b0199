#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sage/error.hpp"

namespace sage {

struct GridDims {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t area() const noexcept { return height * width; }
  bool valid() const noexcept { return height >= 1 && width >= 1; }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

inline std::string to_string(const GridDims& d) {
  return std::to_string(d.height) + "x" + std::to_string(d.width);
}

inline void require_same_dims(const GridDims& a, const GridDims& b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": dimension mismatch " + to_string(a) + " vs " + to_string(b));
}

/// Per-element admissibility for each grid flavour.
template <typename T>
struct GridTraits;

template <>
struct GridTraits<float> {
  static bool admissible(float v) noexcept { return std::isfinite(v) && v >= 0.0f; }
  static constexpr const char* rule = "finite and >= 0";
};

template <>
struct GridTraits<double> {
  static bool admissible(double v) noexcept { return std::isfinite(v) && v >= 0.0; }
  static constexpr const char* rule = "finite and >= 0";
};

template <>
struct GridTraits<std::uint8_t> {
  static bool admissible(std::uint8_t v) noexcept { return v <= 1; }
  static constexpr const char* rule = "0 or 1";
};

/// Dense row-major H x W grid whose invariants are checked at construction.
/// Instances are immutable; every transform returns a new grid.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(GridDims dims, T fill) : dims_(dims), data_(dims.area(), fill) {
    check_dims();
    check_value(fill, 0);
  }

  Grid(GridDims dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    check_dims();
    if (data_.size() != dims_.area())
      throw DimensionError("grid data length " + std::to_string(data_.size()) + " does not match " +
                           to_string(dims_));
    for (std::size_t i = 0; i < data_.size(); ++i) check_value(data_[i], i);
  }

  static Grid zeros(GridDims dims) { return Grid(dims, T{0}); }

  GridDims dims() const noexcept { return dims_; }
  std::size_t height() const noexcept { return dims_.height; }
  std::size_t width() const noexcept { return dims_.width; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const T> values() const noexcept { return data_; }
  T operator[](std::size_t i) const noexcept { return data_[i]; }
  T at(std::size_t row, std::size_t col) const noexcept { return data_[row * dims_.width + col]; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  void check_dims() const {
    if (!dims_.valid()) throw ValidationError("grid dims must be >= 1, got " + to_string(dims_));
  }

  static void check_value(T v, std::size_t i) {
    if (!GridTraits<T>::admissible(v))
      throw ValidationError("grid value at index " + std::to_string(i) + " must be " + GridTraits<T>::rule);
  }

  GridDims dims_{};
  std::vector<T> data_;
};

/// Non-negative saliency values in 32-bit storage: gaze maps, predictions, nearness, SAGE maps.
using SalMap = Grid<float>;
/// 64-bit grid produced by sum-normalization (a discrete distribution over pixels).
using DensityMap = Grid<double>;
/// Object-vs-background segmentation, values exactly 0 or 1.
using BinaryMask = Grid<std::uint8_t>;

/// Axis-aligned box in pixel units. Covers columns [x, x+w) and rows [y, y+h).
struct BBox {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t w = 0;
  std::size_t h = 0;
  std::string class_name;

  bool contains(std::size_t row, std::size_t col) const noexcept {
    return col >= x && col < x + w && row >= y && row < y + h;
  }
  bool fits(const GridDims& d) const noexcept { return w >= 1 && h >= 1 && x + w <= d.width && y + h <= d.height; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

inline void require_fits(const BBox& b, const GridDims& d) {
  if (!b.fits(d))
    throw ValidationError("bbox (" + std::to_string(b.x) + "," + std::to_string(b.y) + "," + std::to_string(b.w) +
                          "," + std::to_string(b.h) + ") out of bounds for grid " + to_string(d));
}

template <typename T>
double grid_sum(const Grid<T>& g) noexcept {
  double s = 0.0;
  for (T v : g.values()) s += static_cast<double>(v);
  return s;
}

template <typename T>
double grid_mean(const Grid<T>& g) noexcept {
  return g.size() == 0 ? 0.0 : grid_sum(g) / static_cast<double>(g.size());
}

template <typename T>
T grid_max(const Grid<T>& g) noexcept {
  T m{0};
  for (T v : g.values())
    if (v > m) m = v;
  return m;
}

/// Index of the first maximal element (row-major scan).
template <typename T>
std::size_t grid_argmax(const Grid<T>& g) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (g[i] > g[best]) best = i;
  return best;
}

inline SalMap to_salmap(const BinaryMask& m) {
  std::vector<float> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = static_cast<float>(m[i]);
  return SalMap(m.dims(), std::move(out));
}

inline std::size_t count_ones(const BinaryMask& m) noexcept {
  std::size_t n = 0;
  for (auto v : m.values()) n += v;
  return n;
}

}  // namespace sage
