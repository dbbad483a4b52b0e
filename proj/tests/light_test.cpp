#include <gtest/gtest.h>

#include "aesthetic/light.hpp"
#include "oracles.hpp"

using namespace aesthetic;

TEST(Light, SolidGray) {
  const auto f = extract_light_features(Raster::filled(5, 4, {128, 128, 128}));
  EXPECT_EQ(f.f1, 128.0);
  EXPECT_EQ(f.f2, 0.0);
  EXPECT_EQ(f.f3, 128.0);
  EXPECT_EQ(f.f4, 0.0);
}

TEST(Light, HalfBlackHalfWhite) {
  Raster img = Raster::filled(4, 2, {0, 0, 0});
  for (std::size_t x = 0; x < 4; ++x) img.set(x, 1, {255, 255, 255});
  const auto f = extract_light_features(img);
  EXPECT_EQ(f.f1, 127.5);
  EXPECT_EQ(f.f2, 127.5);
  EXPECT_EQ(f.f3, 127.5);
  EXPECT_EQ(f.f4, 127.5);
}

TEST(Light, RedAndBluePixels) {
  const Raster img(2, 1, {255, 0, 0, 0, 0, 255});
  const auto f = extract_light_features(img);
  EXPECT_EQ(f.f1, 255.0);
  EXPECT_EQ(f.f2, 0.0);
  EXPECT_EQ(f.f3, 127.5);
  EXPECT_EQ(f.f4, 0.0);
}

TEST(Light, AllBlackIsZero) {
  const auto f = extract_light_features(Raster::filled(3, 3, {0, 0, 0}));
  EXPECT_EQ(f.values(), (std::array<double, 4>{0, 0, 0, 0}));
}

TEST(Light, OrderSwitchSwapsPairs) {
  aesthetic::Rng rng(1);
  const Raster img = oracle::random_raster(rng, 9, 7);
  const auto a = extract_light_features(img, LightOrder::ValueFirst);
  const auto b = extract_light_features(img, LightOrder::LightnessFirst);
  EXPECT_EQ(a.f1, b.f3);
  EXPECT_EQ(a.f2, b.f4);
  EXPECT_EQ(a.f3, b.f1);
  EXPECT_EQ(a.f4, b.f2);
}

TEST(Light, MatchesMomentOracleOnRandomImages) {
  aesthetic::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Raster img = oracle::random_raster(rng, 1 + rng.below(30), 1 + rng.below(30));
    std::vector<double> v, l;
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
      const Rgb p = img.pixel(i);
      v.push_back(std::max({p.r, p.g, p.b}));
      l.push_back((std::max({p.r, p.g, p.b}) + std::min({p.r, p.g, p.b})) / 2.0);
    }
    const auto f = extract_light_features(img);
    EXPECT_NEAR(f.f1, oracle::mean(v), 1e-9);
    EXPECT_NEAR(f.f3, oracle::mean(l), 1e-9);
    EXPECT_NEAR(f.f2 * f.f2, oracle::variance_moments(v), 1e-9 * std::max(1.0, f.f2 * f.f2));
    EXPECT_NEAR(f.f4 * f.f4, oracle::variance_moments(l), 1e-9 * std::max(1.0, f.f4 * f.f4));
    EXPECT_LE(f.f2, 127.5);
    EXPECT_LE(f.f4, 127.5);
  }
}

TEST(Light, PixelPermutationInvariance) {
  aesthetic::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Raster img = oracle::random_raster(rng, 13, 11);
    std::vector<std::size_t> order(img.pixel_count());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<std::uint8_t> px;
    for (std::size_t i : order) {
      const Rgb p = img.pixel(i);
      px.insert(px.end(), {p.r, p.g, p.b});
    }
    const auto a = extract_light_features(img).values();
    const auto b = extract_light_features(Raster(11, 13, px)).values();
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(a[k], b[k], 1e-9);
  }
}
