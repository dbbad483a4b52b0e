#pragma once

#include <array>
#include <cmath>

#include "aesthetic/imaging.hpp"

namespace aesthetic {

/// Which brightness channel feeds f1/f2; the other feeds f3/f4.
enum class LightOrder {
  ValueFirst,      // f1,f2 over HSV value; f3,f4 over HSL lightness
  LightnessFirst,  // f1,f2 over HSL lightness; f3,f4 over HSV value
};

struct LightFeatures {
  double f1{0.0};  // mean level
  double f2{0.0};  // population std
  double f3{0.0};  // mean level
  double f4{0.0};  // population std

  std::array<double, 4> values() const { return {f1, f2, f3, f4}; }
};

namespace detail {

struct MeanStd {
  double mean;
  double stddev;
};

// Two-pass population statistics over a per-pixel level function.
template <typename LevelFn>
MeanStd level_stats(const Raster& image, LevelFn&& level) {
  const std::size_t n = image.pixel_count();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += level(image.pixel(i));
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = level(image.pixel(i)) - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / static_cast<double>(n))};
}

}  // namespace detail

inline LightFeatures extract_light_features(const Raster& image,
                                            LightOrder order = LightOrder::ValueFirst) {
  const auto value = detail::level_stats(image, [](Rgb p) { return rgb_to_hsv(p).value; });
  const auto lightness = detail::level_stats(image, [](Rgb p) { return rgb_to_hsl(p).lightness; });
  const auto& first = order == LightOrder::ValueFirst ? value : lightness;
  const auto& second = order == LightOrder::ValueFirst ? lightness : value;
  return {first.mean, first.stddev, second.mean, second.stddev};
}

}  // namespace aesthetic
