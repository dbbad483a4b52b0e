#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "aesthetic/geometry.hpp"
#include "aesthetic/imaging.hpp"

namespace aesthetic {

/// Per-pixel salience in [0,1], same geometry as the source image.
struct SaliencyMap {
  std::size_t width{0};
  std::size_t height{0};
  std::vector<double> values;

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

enum class PerceptionSource { Sidecar, Fallback };

struct PerceptionBundle {
  SaliencyMap saliency;
  std::vector<LineSegment> lines;  // strongest first
  std::vector<Circle> circles;
  PerceptionSource source{PerceptionSource::Fallback};
};

struct PerceptionConfig {
  double sigma_center{2.0};
  double sigma_surround{16.0};
  std::size_t max_lines{10};
  // Fallback detectors run on a box-downsampled copy when the longer side
  // exceeds this many pixels; results are mapped back to full resolution.
  std::size_t max_working_side{512};
};

// ---------------------------------------------------------------------------
// Image plumbing shared by the fallback detectors.

namespace detail {

struct GrayImage {
  std::size_t width{0};
  std::size_t height{0};
  std::vector<double> values;

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

inline GrayImage to_gray(const Raster& image) {
  GrayImage g{image.width(), image.height(), std::vector<double>(image.pixel_count())};
  for (std::size_t i = 0; i < image.pixel_count(); ++i) g.values[i] = luma(image.pixel(i));
  return g;
}

inline std::size_t working_factor(std::size_t width, std::size_t height, std::size_t max_side) {
  const std::size_t longest = std::max(width, height);
  if (max_side == 0 || longest <= max_side) return 1;
  return (longest + max_side - 1) / max_side;
}

// Box-filter downsampling by an integer factor; partial edge blocks average
// what they cover.
inline GrayImage downsample(const GrayImage& src, std::size_t factor) {
  if (factor <= 1) return src;
  GrayImage dst;
  dst.width = (src.width + factor - 1) / factor;
  dst.height = (src.height + factor - 1) / factor;
  dst.values.assign(dst.width * dst.height, 0.0);
  for (std::size_t by = 0; by < dst.height; ++by) {
    for (std::size_t bx = 0; bx < dst.width; ++bx) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t y = by * factor; y < std::min(src.height, (by + 1) * factor); ++y) {
        for (std::size_t x = bx * factor; x < std::min(src.width, (bx + 1) * factor); ++x) {
          sum += src.at(x, y);
          ++n;
        }
      }
      dst.values[by * dst.width + bx] = sum / static_cast<double>(n);
    }
  }
  return dst;
}

inline std::vector<double> gaussian_kernel(double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double w = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

inline std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

// Separable Gaussian blur with edge replication.
inline GrayImage gaussian_blur(const GrayImage& src, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(k.size() / 2);
  GrayImage tmp{src.width, src.height, std::vector<double>(src.values.size())};
  for (std::size_t y = 0; y < src.height; ++y) {
    for (std::size_t x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        acc += k[static_cast<std::size_t>(i + radius)] *
               src.at(clamp_index(static_cast<std::ptrdiff_t>(x) + i, src.width), y);
      }
      tmp.values[y * src.width + x] = acc;
    }
  }
  GrayImage out{src.width, src.height, std::vector<double>(src.values.size())};
  for (std::size_t y = 0; y < src.height; ++y) {
    for (std::size_t x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        acc += k[static_cast<std::size_t>(i + radius)] *
               tmp.at(x, clamp_index(static_cast<std::ptrdiff_t>(y) + i, src.height));
      }
      out.values[y * src.width + x] = acc;
    }
  }
  return out;
}

struct Gradient {
  std::size_t width{0};
  std::size_t height{0};
  std::vector<double> gx;
  std::vector<double> gy;
  std::vector<double> magnitude;
};

inline Gradient sobel(const GrayImage& g) {
  Gradient out{g.width, g.height, std::vector<double>(g.values.size()),
               std::vector<double>(g.values.size()), std::vector<double>(g.values.size())};
  const auto px = [&g](std::ptrdiff_t x, std::ptrdiff_t y) {
    return g.at(clamp_index(x, g.width), clamp_index(y, g.height));
  };
  for (std::size_t y = 0; y < g.height; ++y) {
    for (std::size_t x = 0; x < g.width; ++x) {
      const auto sx = static_cast<std::ptrdiff_t>(x);
      const auto sy = static_cast<std::ptrdiff_t>(y);
      const double gx = (px(sx + 1, sy - 1) + 2.0 * px(sx + 1, sy) + px(sx + 1, sy + 1)) -
                        (px(sx - 1, sy - 1) + 2.0 * px(sx - 1, sy) + px(sx - 1, sy + 1));
      const double gy = (px(sx - 1, sy + 1) + 2.0 * px(sx, sy + 1) + px(sx + 1, sy + 1)) -
                        (px(sx - 1, sy - 1) + 2.0 * px(sx, sy - 1) + px(sx + 1, sy - 1));
      const std::size_t i = y * g.width + x;
      out.gx[i] = gx;
      out.gy[i] = gy;
      out.magnitude[i] = std::hypot(gx, gy);
    }
  }
  return out;
}

/// Edge pixels: gradient magnitude strictly above the 90th percentile and
/// above zero.
inline std::vector<char> edge_mask(const Gradient& grad) {
  std::vector<double> sorted = grad.magnitude;
  std::vector<char> mask(sorted.size(), 0);
  if (sorted.empty()) return mask;
  const std::size_t k = std::min(sorted.size() - 1,
                                 static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(sorted.size() - 1))));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  const double cut = std::max(sorted[k], 1e-9);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = grad.magnitude[i] > cut ? 1 : 0;
  if (std::none_of(mask.begin(), mask.end(), [](char c) { return c != 0; })) {
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = grad.magnitude[i] >= cut ? 1 : 0;
  }
  return mask;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Saliency

/// Difference-of-Gaussians contrast on luma, min-max normalized to [0,1].
inline SaliencyMap fallback_saliency(const Raster& image, const PerceptionConfig& cfg = {}) {
  const detail::GrayImage full = detail::to_gray(image);
  const std::size_t factor =
      detail::working_factor(image.width(), image.height(), cfg.max_working_side);
  const detail::GrayImage gray = detail::downsample(full, factor);
  const double sc = cfg.sigma_center / static_cast<double>(factor);
  const double ss = cfg.sigma_surround / static_cast<double>(factor);
  const detail::GrayImage center = detail::gaussian_blur(gray, std::max(sc, 0.5));
  const detail::GrayImage surround = detail::gaussian_blur(gray, std::max(ss, 1.0));

  std::vector<double> dog(gray.values.size());
  for (std::size_t i = 0; i < dog.size(); ++i) dog[i] = std::abs(center.values[i] - surround.values[i]);
  const auto [lo, hi] = std::minmax_element(dog.begin(), dog.end());
  const double min = *lo;
  const double range = *hi - *lo;

  SaliencyMap map{image.width(), image.height(), std::vector<double>(image.pixel_count(), 0.0)};
  if (range <= 1e-9) return map;
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const double v = dog[(y / factor) * gray.width + (x / factor)];
      map.values[y * image.width() + x] = std::clamp((v - min) / range, 0.0, 1.0);
    }
  }
  return map;
}

/// Otsu threshold over 256 salience levels; returns the threshold level t such
/// that foreground = level > t, or -1 when the histogram has a single level.
inline int otsu_level(const std::array<std::size_t, 256>& hist) {
  const double total = static_cast<double>(std::accumulate(hist.begin(), hist.end(), std::size_t{0}));
  if (total == 0.0) return -1;
  double sum_all = 0.0;
  for (std::size_t i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * static_cast<double>(hist[i]);

  double best = 0.0;
  int best_t = -1;
  double w0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += static_cast<double>(hist[static_cast<std::size_t>(t)]);
    sum0 += t * static_cast<double>(hist[static_cast<std::size_t>(t)]);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

inline int salience_level(double v) {
  return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

/// Mean coordinate of the Otsu foreground; the image center (w/2, h/2) when
/// nothing stands out.
inline Point salient_centroid(const SaliencyMap& map) {
  const Point center{static_cast<double>(map.width) / 2.0, static_cast<double>(map.height) / 2.0};
  std::array<std::size_t, 256> hist{};
  for (double v : map.values) ++hist[static_cast<std::size_t>(salience_level(v))];
  const int t = otsu_level(hist);
  if (t < 0) return center;

  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 0; y < map.height; ++y) {
    for (std::size_t x = 0; x < map.width; ++x) {
      if (salience_level(map.at(x, y)) > t) {
        sx += static_cast<double>(x);
        sy += static_cast<double>(y);
        ++n;
      }
    }
  }
  if (n == 0) return center;
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

// ---------------------------------------------------------------------------
// Lines

namespace detail {

struct EdgePoint {
  double x;
  double y;
};

inline std::vector<EdgePoint> collect_edges(const std::vector<char>& mask, std::size_t width) {
  std::vector<EdgePoint> pts;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) pts.push_back({static_cast<double>(i % width), static_cast<double>(i / width)});
  }
  return pts;
}

// Total-least-squares fit through the points; endpoints are the extreme
// projections onto the fitted direction.
inline LineSegment fit_segment(const std::vector<EdgePoint>& pts) {
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const double dx = std::cos(phi), dy = std::sin(phi);
  double tmin = 0.0, tmax = 0.0;
  bool first = true;
  for (const auto& p : pts) {
    const double t = (p.x - mx) * dx + (p.y - my) * dy;
    if (first || t < tmin) tmin = t;
    if (first || t > tmax) tmax = t;
    first = false;
  }
  return {{mx + tmin * dx, my + tmin * dy}, {mx + tmax * dx, my + tmax * dy},
          static_cast<double>(pts.size())};
}

}  // namespace detail

struct HoughLineConfig {
  double band{1.5};             // px: edge points assigned to a peak line
  double max_gap{5.0};          // px: largest hole inside one segment
  double min_length_fraction{0.1};  // of min(w,h)
  double merge_angle{3.0};      // deg: near-duplicate of an accepted segment
  double merge_distance{4.0};   // px
};

/// Sobel edges, top-decile threshold, then a deterministic progressive Hough
/// transform (1 px, 1 degree): take the strongest accumulator cell, cut the
/// longest gap-bounded run of edge points along it, refit, remove those points'
/// votes, repeat. Segments are returned by descending support.
inline std::vector<LineSegment> fallback_lines(const Raster& image, const PerceptionConfig& cfg = {},
                                               const HoughLineConfig& hough = {}) {
  const std::size_t factor =
      detail::working_factor(image.width(), image.height(), cfg.max_working_side);
  const detail::GrayImage gray = detail::downsample(detail::to_gray(image), factor);
  const detail::Gradient grad = detail::sobel(gray);
  const std::vector<char> mask = detail::edge_mask(grad);
  std::vector<detail::EdgePoint> pts = detail::collect_edges(mask, gray.width);
  std::vector<LineSegment> lines;
  if (pts.empty() || cfg.max_lines == 0) return lines;

  constexpr int kThetaBins = 180;
  std::array<double, kThetaBins> cos_t{}, sin_t{};
  for (int t = 0; t < kThetaBins; ++t) {
    const double a = t * std::numbers::pi / 180.0;
    cos_t[static_cast<std::size_t>(t)] = std::cos(a);
    sin_t[static_cast<std::size_t>(t)] = std::sin(a);
  }
  const double diag = std::hypot(static_cast<double>(gray.width), static_cast<double>(gray.height));
  const auto offset = static_cast<long>(std::ceil(diag)) + 1;
  const auto n_rho = static_cast<std::size_t>(2 * offset + 1);
  std::vector<int> acc(kThetaBins * n_rho, 0);
  const auto rho_index = [&](const detail::EdgePoint& p, std::size_t t) {
    return static_cast<std::size_t>(std::lround(p.x * cos_t[t] + p.y * sin_t[t]) + offset);
  };
  const auto vote = [&](const detail::EdgePoint& p, int delta) {
    for (std::size_t t = 0; t < kThetaBins; ++t) acc[t * n_rho + rho_index(p, t)] += delta;
  };
  for (const auto& p : pts) vote(p, +1);

  std::vector<char> used(pts.size(), 0);
  const double min_length =
      std::max(3.0, hough.min_length_fraction * static_cast<double>(std::min(gray.width, gray.height)));
  const int min_votes = static_cast<int>(std::ceil(min_length));

  while (lines.size() < cfg.max_lines) {
    const auto peak_it = std::max_element(acc.begin(), acc.end());
    if (*peak_it < min_votes) break;
    const auto cell = static_cast<std::size_t>(peak_it - acc.begin());
    const std::size_t t = cell / n_rho;
    const double rho = static_cast<double>(static_cast<long>(cell % n_rho) - offset);

    // Points near the peak line, ordered along it.
    std::vector<std::pair<double, std::size_t>> along;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (used[i] != 0) continue;
      const double r = pts[i].x * cos_t[t] + pts[i].y * sin_t[t];
      if (std::abs(r - rho) <= hough.band) {
        along.emplace_back(-pts[i].x * sin_t[t] + pts[i].y * cos_t[t], i);
      }
    }
    std::sort(along.begin(), along.end());

    std::size_t best_begin = 0, best_end = 0, run_begin = 0;
    for (std::size_t k = 1; k <= along.size(); ++k) {
      if (k == along.size() || along[k].first - along[k - 1].first > hough.max_gap) {
        if (k - run_begin > best_end - best_begin) {
          best_begin = run_begin;
          best_end = k;
        }
        run_begin = k;
      }
    }
    const double run_length =
        best_end > best_begin ? along[best_end - 1].first - along[best_begin].first : 0.0;
    if (best_end - best_begin < static_cast<std::size_t>(min_votes) || run_length < min_length) {
      *peak_it = 0;  // nothing usable under this cell
      continue;
    }

    std::vector<detail::EdgePoint> run;
    for (std::size_t k = best_begin; k < best_end; ++k) {
      const std::size_t i = along[k].second;
      run.push_back(pts[i]);
      used[i] = 1;
      vote(pts[i], -1);
    }
    LineSegment seg = detail::fit_segment(run);
    const bool duplicate = std::any_of(lines.begin(), lines.end(), [&](const LineSegment& other) {
      return orientation_difference(seg.angle_degrees(), other.angle_degrees()) <= hough.merge_angle &&
             distance_to_line(seg.midpoint(), other) <= hough.merge_distance;
    });
    if (!duplicate) lines.push_back(seg);
  }

  // Back to full-resolution pixel coordinates (block centers).
  const double f = static_cast<double>(factor);
  const double shift = (f - 1.0) / 2.0;
  for (auto& l : lines) {
    l.p1 = {l.p1.x * f + shift, l.p1.y * f + shift};
    l.p2 = {l.p2.x * f + shift, l.p2.y * f + shift};
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const LineSegment& a, const LineSegment& b) { return a.strength > b.strength; });
  return lines;
}

// ---------------------------------------------------------------------------
// Circles

struct HoughCircleConfig {
  double min_radius_fraction{0.05};  // of min(w,h)
  double max_radius_fraction{0.5};
  double radius_step{2.0};           // px
  double min_support{0.6};           // fraction of perimeter samples on edges
  std::size_t candidates_per_radius{5};
};

/// Gradient-directed circle Hough transform: every edge pixel votes for the
/// two centers along its gradient at each candidate radius, and accumulator
/// peaks are kept when enough of their perimeter lies on edge pixels.
inline std::vector<Circle> fallback_circles(const Raster& image, const PerceptionConfig& cfg = {},
                                            const HoughCircleConfig& hough = {}) {
  const std::size_t factor =
      detail::working_factor(image.width(), image.height(), cfg.max_working_side);
  const detail::GrayImage gray = detail::downsample(detail::to_gray(image), factor);
  const std::vector<char> mask = detail::edge_mask(detail::sobel(gray));
  const detail::Gradient grad = detail::sobel(detail::gaussian_blur(gray, 1.0));
  const std::size_t w = gray.width, h = gray.height;
  const double min_side = static_cast<double>(std::min(w, h));
  const double r_min = std::max(2.0, hough.min_radius_fraction * min_side);
  const double r_max = hough.max_radius_fraction * min_side;

  std::vector<std::size_t> edge_idx;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) edge_idx.push_back(i);
  }
  std::vector<Circle> circles;
  if (edge_idx.empty()) return circles;

  struct Candidate {
    Circle circle;
    double support;
    std::size_t hits;
  };
  std::vector<Candidate> accepted;
  std::vector<int> acc(w * h, 0);
  std::vector<int> score(w * h, 0);
  std::vector<int> box((w + 1) * (h + 1), 0);
  std::vector<std::size_t> touched;

  const auto is_edge = [&](long x, long y) {
    return x >= 0 && y >= 0 && x < static_cast<long>(w) && y < static_cast<long>(h) &&
           mask[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] != 0;
  };

  for (double r = r_min; r <= r_max + 1e-9; r += hough.radius_step) {
    for (std::size_t i : touched) acc[i] = 0;
    touched.clear();
    for (std::size_t i : edge_idx) {
      const double mag = grad.magnitude[i];
      if (!(mag > 0.0)) continue;
      const double ux = grad.gx[i] / mag, uy = grad.gy[i] / mag;
      const double x = static_cast<double>(i % w), y = static_cast<double>(i / w);
      for (double sign : {1.0, -1.0}) {
        const long cx = std::lround(x + sign * r * ux);
        const long cy = std::lround(y + sign * r * uy);
        if (cx < 0 || cy < 0 || cx >= static_cast<long>(w) || cy >= static_cast<long>(h)) continue;
        const std::size_t c = static_cast<std::size_t>(cy) * w + static_cast<std::size_t>(cx);
        if (acc[c]++ == 0) touched.push_back(c);
      }
    }

    // Votes within 2 px of each cell, via a summed-area table.
    std::fill(box.begin(), box.end(), 0);
    for (std::size_t y = 0; y < h; ++y) {
      int row = 0;
      for (std::size_t x = 0; x < w; ++x) {
        row += acc[y * w + x];
        box[(y + 1) * (w + 1) + x + 1] = box[y * (w + 1) + x + 1] + row;
      }
    }
    const auto votes_near = [&](std::size_t c) {
      const std::size_t cx = c % w, cy = c / w;
      const std::size_t x0 = cx >= 2 ? cx - 2 : 0, y0 = cy >= 2 ? cy - 2 : 0;
      const std::size_t x1 = std::min(w, cx + 3), y1 = std::min(h, cy + 3);
      return box[y1 * (w + 1) + x1] - box[y0 * (w + 1) + x1] - box[y1 * (w + 1) + x0] + box[y0 * (w + 1) + x0];
    };
    for (std::size_t c : touched) score[c] = votes_near(c);

    const int min_votes = std::max(6, static_cast<int>(std::ceil(0.25 * 2.0 * std::numbers::pi * r)));
    std::vector<std::size_t> peaks;
    std::sort(touched.begin(), touched.end());
    for (std::size_t c : touched) {
      const int v = score[c];
      if (v < min_votes) continue;
      const long cx = static_cast<long>(c % w), cy = static_cast<long>(c / w);
      bool is_peak = true;
      for (long dy = -2; dy <= 2 && is_peak; ++dy) {
        for (long dx = -2; dx <= 2 && is_peak; ++dx) {
          const long nx = cx + dx, ny = cy + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= static_cast<long>(w) || ny >= static_cast<long>(h)) {
            continue;
          }
          const std::size_t n = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
          // Plateaus keep their first cell in scan order.
          const int nv = acc[n] > 0 ? score[n] : 0;
          if (nv > v || (nv == v && n < c)) is_peak = false;
        }
      }
      if (is_peak) peaks.push_back(c);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    if (peaks.size() > hough.candidates_per_radius) peaks.resize(hough.candidates_per_radius);

    const auto samples = static_cast<std::size_t>(std::max(24.0, std::ceil(2.0 * std::numbers::pi * r)));
    for (std::size_t c : peaks) {
      const double cx = static_cast<double>(c % w), cy = static_cast<double>(c / w);
      std::size_t supported = 0, hits = 0;
      for (std::size_t k = 0; k < samples; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(samples);
        const long sx = std::lround(cx + r * std::cos(a));
        const long sy = std::lround(cy + r * std::sin(a));
        std::size_t local = 0;
        for (long dy = -1; dy <= 1; ++dy) {
          for (long dx = -1; dx <= 1; ++dx) {
            const long nx = sx + dx, ny = sy + dy;
            if (!is_edge(nx, ny)) continue;
            const std::size_t n = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
            const double rx = static_cast<double>(nx) - cx, ry = static_cast<double>(ny) - cy;
            const double norm = std::hypot(rx, ry) * grad.magnitude[n];
            // Only edges whose gradient points roughly along the radius count.
            if (norm > 0.0 && std::abs(rx * grad.gx[n] + ry * grad.gy[n]) >= 0.8 * norm) ++local;
          }
        }
        supported += local > 0 ? 1 : 0;
        hits += local;
      }
      const double support = static_cast<double>(supported) / static_cast<double>(samples);
      if (support >= hough.min_support) accepted.push_back({{{cx, cy}, r}, support, hits});
    }
  }

  std::stable_sort(accepted.begin(), accepted.end(), [](const Candidate& a, const Candidate& b) {
    if (a.support != b.support) return a.support > b.support;
    return a.hits > b.hits;
  });
  const double f = static_cast<double>(factor);
  const double shift = (f - 1.0) / 2.0;
  std::vector<Circle> kept;
  for (const auto& cand : accepted) {
    const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Circle& k) {
      const double rr = std::max(k.radius, cand.circle.radius);
      return distance(k.center, cand.circle.center) <= std::max(2.0, 0.25 * rr) &&
             std::abs(k.radius - cand.circle.radius) <= 0.25 * rr + 2.0;
    });
    if (!overlaps) kept.push_back(cand.circle);
  }
  for (auto& c : kept) {
    c.center = {c.center.x * f + shift, c.center.y * f + shift};
    c.radius *= f;
  }
  return kept;
}

inline PerceptionBundle fallback_perception(const Raster& image, const PerceptionConfig& cfg = {}) {
  PerceptionBundle bundle;
  bundle.saliency = fallback_saliency(image, cfg);
  bundle.lines = fallback_lines(image, cfg);
  bundle.circles = fallback_circles(image, cfg);
  bundle.source = PerceptionSource::Fallback;
  return bundle;
}

// ---------------------------------------------------------------------------
// Detection sidecar (JSON lines)

struct SidecarEntry {
  std::string id;
  std::optional<std::filesystem::path> saliency;  // resolved against the sidecar's directory
  std::vector<LineSegment> lines;
  std::vector<Circle> circles;
};

namespace detail {

inline double sidecar_number(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw Error(ErrorCode::MalformedSidecar,
                "line " + std::to_string(line_no) + ": missing numeric field '" + key + "'");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": non-finite '" + key + "'");
  }
  return v;
}

inline SidecarEntry parse_sidecar_line(const std::string& text, std::size_t line_no,
                                       const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
    throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": expected object with string 'id'");
  }
  SidecarEntry entry;
  entry.id = j["id"].get<std::string>();
  if (j.contains("saliency") && !j["saliency"].is_null()) {
    if (!j["saliency"].is_string()) {
      throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": 'saliency' must be a path");
    }
    std::filesystem::path p = j["saliency"].get<std::string>();
    entry.saliency = p.is_absolute() ? p : base_dir / p;
  }
  if (j.contains("lines")) {
    if (!j["lines"].is_array()) {
      throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": 'lines' must be an array");
    }
    for (const auto& l : j["lines"]) {
      if (!l.is_object()) throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": bad line entry");
      LineSegment seg{{sidecar_number(l, "x1", line_no), sidecar_number(l, "y1", line_no)},
                      {sidecar_number(l, "x2", line_no), sidecar_number(l, "y2", line_no)},
                      l.contains("strength") ? sidecar_number(l, "strength", line_no) : 0.0};
      if (seg.p1 == seg.p2 || seg.strength < 0.0) {
        throw Error(ErrorCode::MalformedSidecar,
                    "line " + std::to_string(line_no) + ": degenerate segment or negative strength");
      }
      entry.lines.push_back(seg);
    }
  }
  if (j.contains("circles")) {
    if (!j["circles"].is_array()) {
      throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": 'circles' must be an array");
    }
    for (const auto& c : j["circles"]) {
      if (!c.is_object()) throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": bad circle entry");
      Circle circle{{sidecar_number(c, "cx", line_no), sidecar_number(c, "cy", line_no)},
                    sidecar_number(c, "r", line_no)};
      if (!(circle.radius > 0.0)) {
        throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": circle radius must be positive");
      }
      entry.circles.push_back(circle);
    }
  }
  return entry;
}

}  // namespace detail

/// Parsed detection sidecar, indexed by image id.
class Sidecar {
 public:
  static Sidecar load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open sidecar " + path.string());
    return parse(in, path.parent_path());
  }

  static Sidecar parse(std::istream& in, const std::filesystem::path& base_dir = {}) {
    Sidecar sc;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
      ++line_no;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      SidecarEntry e = detail::parse_sidecar_line(text, line_no, base_dir);
      if (sc.entries_.count(e.id) != 0) {
        throw Error(ErrorCode::MalformedSidecar, "line " + std::to_string(line_no) + ": duplicate id '" + e.id + "'");
      }
      std::string id = e.id;
      sc.entries_.emplace(std::move(id), std::move(e));
    }
    return sc;
  }

  bool contains(const std::string& id) const { return entries_.count(id) != 0; }

  const SidecarEntry& entry(const std::string& id) const {
    const auto it = entries_.find(id);
    if (it == entries_.end()) throw Error(ErrorCode::MissingEntry, "no sidecar entry for '" + id + "'");
    return it->second;
  }

  /// Bundle for one image. Without a recorded saliency map the fallback map
  /// is computed from `image`.
  PerceptionBundle bundle(const std::string& id, const Raster& image, const PerceptionConfig& cfg = {}) const {
    const SidecarEntry& e = entry(id);
    PerceptionBundle b;
    b.source = PerceptionSource::Sidecar;
    if (e.saliency) {
      const Raster sal = load_image(*e.saliency);
      if (sal.width() != image.width() || sal.height() != image.height()) {
        throw Error(ErrorCode::DimensionMismatch, "saliency map for '" + id + "' is " +
                                                      std::to_string(sal.width()) + "x" + std::to_string(sal.height()) +
                                                      ", image is " + std::to_string(image.width()) + "x" +
                                                      std::to_string(image.height()));
      }
      b.saliency = {sal.width(), sal.height(), std::vector<double>(sal.pixel_count())};
      for (std::size_t i = 0; i < sal.pixel_count(); ++i) b.saliency.values[i] = sal.pixel(i).r / 255.0;
    } else {
      b.saliency = fallback_saliency(image, cfg);
    }
    b.lines = e.lines;
    std::stable_sort(b.lines.begin(), b.lines.end(),
                     [](const LineSegment& l, const LineSegment& r) { return l.strength > r.strength; });
    if (b.lines.size() > cfg.max_lines) b.lines.resize(cfg.max_lines);
    b.circles = e.circles;
    return b;
  }

 private:
  std::map<std::string, SidecarEntry> entries_;
};

inline PerceptionBundle load_sidecar(const std::filesystem::path& path, const std::string& image_id,
                                     const Raster& image, const PerceptionConfig& cfg = {}) {
  return Sidecar::load(path).bundle(image_id, image, cfg);
}

}  // namespace aesthetic
