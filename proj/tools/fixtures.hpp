#pragma once

// Synthetic images with known geometry, used by the golden-file tests.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "aesthetic/imaging.hpp"

namespace aesthetic::fixtures {

struct Fixture {
  std::string id;
  std::function<Raster()> make;
};

inline Raster paint(std::size_t w, std::size_t h, const std::function<Rgb(std::size_t, std::size_t)>& f) {
  Raster r = Raster::filled(w, h, {0, 0, 0});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) r.set(x, y, f(x, y));
  return r;
}

inline Raster solid() { return Raster::filled(64, 48, {200, 120, 40}); }

inline Raster two_tone() {
  return paint(64, 48, [](std::size_t x, std::size_t) { return x < 32 ? Rgb{255, 0, 0} : Rgb{0, 0, 255}; });
}

inline Raster striped() {
  return paint(64, 48, [](std::size_t x, std::size_t) { return (x / 4) % 2 == 0 ? Rgb{0, 0, 0} : Rgb{255, 255, 255}; });
}

inline Raster thirds_line() {
  return paint(96, 72, [](std::size_t, std::size_t y) {
    return y >= 23 && y <= 25 ? Rgb{20, 20, 20} : Rgb{230, 230, 230};
  });
}

inline Raster diagonal() {
  return paint(96, 96, [](std::size_t x, std::size_t y) {
    const double d = std::abs(static_cast<double>(x) - static_cast<double>(y)) / std::sqrt(2.0);
    return d <= 1.5 ? Rgb{20, 20, 20} : Rgb{230, 230, 230};
  });
}

inline Raster circle() {
  return paint(96, 96, [](std::size_t x, std::size_t y) {
    const double r = std::hypot(static_cast<double>(x) - 48.0, static_cast<double>(y) - 48.0);
    return std::abs(r - 30.0) <= 1.5 ? Rgb{20, 20, 20} : Rgb{200, 200, 200};
  });
}

inline Raster centered_blob() {
  return paint(96, 96, [](std::size_t x, std::size_t y) {
    const double r = std::hypot(static_cast<double>(x) - 47.5, static_cast<double>(y) - 47.5);
    return r <= 12.0 ? Rgb{255, 255, 255} : Rgb{0, 0, 0};
  });
}

inline std::vector<Fixture> all() {
  return {{"centered_blob", centered_blob}, {"circle", circle},     {"diagonal", diagonal}, {"solid", solid},
          {"striped", striped},             {"thirds_line", thirds_line}, {"two_tone", two_tone}};
}

}  // namespace aesthetic::fixtures
