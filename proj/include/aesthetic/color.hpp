#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "aesthetic/imaging.hpp"

namespace aesthetic {

struct ColorFeatureConfig {
  double c1{0.01};                   // dominant color: fraction of the largest bin
  double c2{0.01};                   // dominant hue: fraction of the pixel count
  double gray_diff_threshold{10.0};  // mean |channel difference| below which an image is near-gray
  double saturation_floor{0.2};      // hue histogram ignores pixels below this saturation
  int rgb_bins_per_channel{8};
  int hue_bins{20};

  void validate() const {
    if (!(c1 > 0.0 && c1 < 1.0) || !(c2 > 0.0 && c2 < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "color thresholds c1, c2 must lie in (0,1)");
    }
    if (gray_diff_threshold < 0.0 || saturation_floor < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "color thresholds must be non-negative");
    }
    if (rgb_bins_per_channel < 1 || rgb_bins_per_channel > 256 || hue_bins < 1 || hue_bins > 360) {
      throw Error(ErrorCode::InvalidArgument, "histogram bin counts out of range");
    }
  }
};

struct ColorFeatures {
  double f1{0.0};  // channel weight in {0, 0.5, 1}
  double f2{0.0};  // RGB dominant color count
  double f3{0.0};  // RGB dominant degree
  double f4{0.0};  // HSV dominant color count
  double f5{0.0};  // HSV dominant degree
  double f6{0.0};  // dominant hue count
  double f7{0.0};  // dominant hue contrast, degrees

  std::array<double, 7> values() const { return {f1, f2, f3, f4, f5, f6, f7}; }
};

struct ColorHistogram {
  std::vector<std::size_t> bins;
  std::size_t total{0};
};

enum class ColorSpace { RGB, HSV };

struct DominantStats {
  std::size_t count{0};
  double degree{0.0};
};

struct HueStats {
  std::size_t count{0};
  double contrast_degrees{0.0};
};

/// Uniform bin index of `x` in [lo, hi) split into `levels`; the top edge
/// folds into the last bin.
inline int uniform_level(double x, double lo, double hi, int levels) {
  const int idx = static_cast<int>(std::floor((x - lo) / (hi - lo) * levels));
  return std::clamp(idx, 0, levels - 1);
}

inline std::size_t rgb_bin(Rgb p, int levels) {
  const auto q = [levels](std::uint8_t c) {
    return static_cast<std::size_t>(uniform_level(c, 0.0, 256.0, levels));
  };
  const auto l = static_cast<std::size_t>(levels);
  return (q(p.r) * l + q(p.g)) * l + q(p.b);
}

inline std::size_t hsv_bin(Rgb p, int levels) {
  const HsvPixel hsv = rgb_to_hsv(p);
  const auto l = static_cast<std::size_t>(levels);
  const auto h = static_cast<std::size_t>(uniform_level(hsv.hue, 0.0, 360.0, levels));
  const auto s = static_cast<std::size_t>(uniform_level(hsv.saturation, 0.0, 1.0, levels));
  const auto v = static_cast<std::size_t>(uniform_level(hsv.value, 0.0, 256.0, levels));
  return (h * l + s) * l + v;
}

inline ColorHistogram color_histogram(const Raster& image, ColorSpace space, int levels = 8) {
  ColorHistogram hist;
  hist.bins.assign(static_cast<std::size_t>(levels) * levels * levels, 0);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const Rgb p = image.pixel(i);
    ++hist.bins[space == ColorSpace::RGB ? rgb_bin(p, levels) : hsv_bin(p, levels)];
  }
  hist.total = image.pixel_count();
  return hist;
}

/// Hue histogram over pixels whose saturation clears `saturation_floor`.
inline ColorHistogram hue_histogram(const Raster& image, double saturation_floor, int bins) {
  ColorHistogram hist;
  hist.bins.assign(static_cast<std::size_t>(bins), 0);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const HsvPixel hsv = rgb_to_hsv(image.pixel(i));
    if (hsv.saturation < saturation_floor) continue;
    ++hist.bins[static_cast<std::size_t>(uniform_level(hsv.hue, 0.0, 360.0, bins))];
    ++hist.total;
  }
  return hist;
}

inline double channel_weight(const Raster& image, const ColorFeatureConfig& cfg = {}) {
  bool all_equal = true;
  double diff_sum = 0.0;
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const Rgb p = image.pixel(i);
    const int rg = std::abs(int{p.r} - int{p.g});
    const int gb = std::abs(int{p.g} - int{p.b});
    const int rb = std::abs(int{p.r} - int{p.b});
    if (rg != 0 || gb != 0) all_equal = false;
    diff_sum += (rg + gb + rb) / 3.0;
  }
  if (all_equal) return 0.0;
  const double mean_diff = diff_sum / static_cast<double>(image.pixel_count());
  return mean_diff < cfg.gray_diff_threshold ? 0.5 : 1.0;
}

/// Bins at least c1 times the fullest bin, and the fullest bin's share of
/// all pixels.
inline DominantStats dominant_stats(const ColorHistogram& hist, double c1) {
  const std::size_t peak = hist.bins.empty() ? 0 : *std::max_element(hist.bins.begin(), hist.bins.end());
  DominantStats out;
  if (peak == 0 || hist.total == 0) return out;
  const double cut = c1 * static_cast<double>(peak);
  out.count = static_cast<std::size_t>(std::count_if(
      hist.bins.begin(), hist.bins.end(), [cut](std::size_t h) { return static_cast<double>(h) >= cut; }));
  out.degree = static_cast<double>(peak) / static_cast<double>(hist.total);
  return out;
}

inline DominantStats dominant_color_stats(const Raster& image, ColorSpace space,
                                          const ColorFeatureConfig& cfg = {}) {
  return dominant_stats(color_histogram(image, space, cfg.rgb_bins_per_channel), cfg.c1);
}

/// Circular distance between the centers of two hue bins, in degrees.
inline double hue_bin_distance(std::size_t i, std::size_t j, int bins) {
  const double width = 360.0 / bins;
  const double d = std::abs(static_cast<double>(i) - static_cast<double>(j)) * width;
  return std::min(d, 360.0 - d);
}

inline HueStats hue_features(const Raster& image, const ColorFeatureConfig& cfg = {}) {
  const ColorHistogram hist = hue_histogram(image, cfg.saturation_floor, cfg.hue_bins);
  // The floor is against every pixel in the image, discarded ones included.
  const double cut = cfg.c2 * static_cast<double>(image.pixel_count());
  std::vector<std::size_t> dominant;
  for (std::size_t i = 0; i < hist.bins.size(); ++i) {
    if (hist.bins[i] > 0 && static_cast<double>(hist.bins[i]) >= cut) dominant.push_back(i);
  }
  HueStats out;
  out.count = dominant.size();
  for (std::size_t a = 0; a < dominant.size(); ++a) {
    for (std::size_t b = a + 1; b < dominant.size(); ++b) {
      out.contrast_degrees =
          std::max(out.contrast_degrees, hue_bin_distance(dominant[a], dominant[b], cfg.hue_bins));
    }
  }
  return out;
}

inline ColorFeatures extract_color_features(const Raster& image, const ColorFeatureConfig& cfg = {}) {
  cfg.validate();
  ColorFeatures f;
  f.f1 = channel_weight(image, cfg);
  const DominantStats rgb = dominant_color_stats(image, ColorSpace::RGB, cfg);
  const DominantStats hsv = dominant_color_stats(image, ColorSpace::HSV, cfg);
  const HueStats hue = hue_features(image, cfg);
  f.f2 = static_cast<double>(rgb.count);
  f.f3 = rgb.degree;
  f.f4 = static_cast<double>(hsv.count);
  f.f5 = hsv.degree;
  f.f6 = static_cast<double>(hue.count);
  f.f7 = hue.contrast_degrees;
  return f;
}

}  // namespace aesthetic
