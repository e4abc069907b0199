#include <gtest/gtest.h>
#include <zlib.h>

#include <cmath>
#include <random>

#include "sage/map_ops.hpp"
#include "sage/png.hpp"
#include "test_support.hpp"

namespace sage {
namespace {

using test::row;

TEST(Grid, RejectsInvalidValuesAndDims) {
  EXPECT_THROW(SalMap({0, 3}, 0.0f), ValidationError);
  EXPECT_THROW(SalMap({1, 2}, std::vector<float>{0.5f}), DimensionError);
  EXPECT_THROW(row({0.1f, -0.5f}), ValidationError);
  EXPECT_THROW(row({0.1f, NAN}), ValidationError);
  EXPECT_THROW(row({INFINITY}), ValidationError);
  EXPECT_THROW(BinaryMask({1, 2}, std::vector<std::uint8_t>{0, 2}), ValidationError);
}

TEST(NormalizeMax, DividesByMaximum) {
  const auto out = normalize_max(row({0.0f, 2.0f, 4.0f}));
  EXPECT_EQ(out, row({0.0f, 0.5f, 1.0f}));
}

TEST(NormalizeMax, AllZeroUnchanged) {
  const auto z = SalMap::zeros({3, 3});
  EXPECT_EQ(normalize_max(z), z);
}

TEST(NormalizeMax, IdempotentOnRandomMaps) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto once = normalize_max(test::random_map(rng, {5, 7}, 0.0f, 30.0f));
    EXPECT_EQ(grid_max(once), 1.0f);
    EXPECT_EQ(normalize_max(once), once);
    for (float v : once.values()) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(NormalizeMax, DoesNotMutateInput) {
  const auto in = row({1.0f, 3.0f});
  const auto copy = in;
  (void)normalize_max(in);
  EXPECT_EQ(in, copy);
}

TEST(NormalizeSum, ProducesDistribution) {
  const auto d = normalize_sum(row({1.0f, 3.0f}));
  EXPECT_DOUBLE_EQ(d[0], 0.25);
  EXPECT_DOUBLE_EQ(d[1], 0.75);
  const auto same = normalize_sum(row({0.25f, 0.75f}));
  EXPECT_DOUBLE_EQ(same[0], 0.25);
  EXPECT_DOUBLE_EQ(same[1], 0.75);
}

TEST(NormalizeSum, ZeroMassThrows) { EXPECT_THROW(normalize_sum(row({0.0f, 0.0f})), DegenerateInputError); }

TEST(NormalizeSum, SumsToOneOnRandomMaps) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto d = normalize_sum(test::random_map(rng, {9, 13}, 0.0f, 1000.0f));
    EXPECT_NEAR(grid_sum(d), 1.0, 1e-9);
  }
}

TEST(ResizeBilinear, IdentityAtEqualDims) {
  std::mt19937_64 rng(3);
  const auto m = test::random_map(rng, {4, 4});
  EXPECT_EQ(resize_bilinear(m, {4, 4}), m);
}

TEST(ResizeBilinear, PreservesConstants) {
  const SalMap c({5, 3}, 0.7f);
  for (GridDims d : {GridDims{1, 1}, GridDims{2, 9}, GridDims{17, 4}, GridDims{128, 256}}) {
    const auto out = resize_bilinear(c, d);
    ASSERT_EQ(out.dims(), d);
    for (float v : out.values()) EXPECT_EQ(v, 0.7f);
  }
}

TEST(ResizeBilinear, AlignCornersClosedForm) {
  // Source index of output column j is j * (in - 1) / (out - 1); [0,1] -> [0, 0.5, 1].
  EXPECT_EQ(resize_bilinear(row({0.0f, 1.0f}), {1, 3}), row({0.0f, 0.5f, 1.0f}));
}

TEST(ResizeBilinear, MatchesSeparableOracle) {
  std::mt19937_64 rng(5);
  const auto src = test::random_map(rng, {3, 4});
  const GridDims target{5, 7};
  const auto out = resize_bilinear(src, target);
  auto sample = [&](double y, double x) {
    const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
    const int y1 = std::min(y0 + 1, 2), x1 = std::min(x0 + 1, 3);
    const double fy = y - y0, fx = x - x0;
    return (1 - fy) * ((1 - fx) * src.at(y0, x0) + fx * src.at(y0, x1)) +
           fy * ((1 - fx) * src.at(y1, x0) + fx * src.at(y1, x1));
  };
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 7; ++c) EXPECT_NEAR(out.at(r, c), sample(r * 2.0 / 4.0, c * 3.0 / 6.0), 1e-6);
}

// Inflates the IDAT stream and strips the per-row filter bytes.
std::vector<std::uint8_t> decode_levels(const std::vector<std::uint8_t>& png, GridDims dims) {
  std::size_t pos = 8;
  std::vector<std::uint8_t> idat;
  while (pos + 8 <= png.size()) {
    const std::uint32_t len = (png[pos] << 24) | (png[pos + 1] << 16) | (png[pos + 2] << 8) | png[pos + 3];
    const std::string type(png.begin() + pos + 4, png.begin() + pos + 8);
    if (type == "IDAT") idat.insert(idat.end(), png.begin() + pos + 8, png.begin() + pos + 8 + len);
    pos += 12 + len;
  }
  std::vector<std::uint8_t> raw(dims.height * (dims.width + 1));
  uLongf raw_len = raw.size();
  EXPECT_EQ(uncompress(raw.data(), &raw_len, idat.data(), idat.size()), Z_OK);
  std::vector<std::uint8_t> levels;
  for (std::size_t r = 0; r < dims.height; ++r) {
    EXPECT_EQ(raw[r * (dims.width + 1)], 0);
    levels.insert(levels.end(), raw.begin() + r * (dims.width + 1) + 1, raw.begin() + (r + 1) * (dims.width + 1));
  }
  return levels;
}

TEST(HeatmapPng, RoundingOracle) {
  EXPECT_EQ(heatmap_levels(row({0.0f, 0.5f, 1.0f})), (std::vector<std::uint8_t>{0, 128, 255}));
}

TEST(HeatmapPng, AllZeroIsBlack) {
  const auto levels = heatmap_levels(SalMap::zeros({4, 4}));
  for (auto v : levels) EXPECT_EQ(v, 0);
}

TEST(HeatmapPng, UniqueMaxIsOnlyWhitePixel) {
  std::mt19937_64 rng(9);
  auto m = test::random_map(rng, {6, 5}, 0.0f, 0.9f);
  std::vector<float> v(m.values().begin(), m.values().end());
  v[17] = 2.0f;
  const auto levels = heatmap_levels(SalMap({6, 5}, v));
  for (std::size_t i = 0; i < levels.size(); ++i) EXPECT_EQ(levels[i] == 255, i == 17);
}

TEST(HeatmapPng, FileDecodesToLevels) {
  test::TempDir dir("png");
  const SalMap m({2, 3}, std::vector<float>{0.0f, 0.25f, 0.5f, 0.75f, 1.0f, 0.1f});
  export_heatmap_png(m, dir / "m.png");
  const auto png = test::read_bytes(dir / "m.png");
  ASSERT_GE(png.size(), 8u);
  EXPECT_EQ(png[1], 'P');
  EXPECT_EQ(decode_levels(png, m.dims()), heatmap_levels(m));
}

}  // namespace
}  // namespace sage
