#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "aesthetic/geometry.hpp"
#include "aesthetic/imaging.hpp"
#include "aesthetic/perception.hpp"

namespace aesthetic {

struct CompositionConfig {
  double line_score_threshold{0.3};
  double angle_tolerance{5.0};     // degrees
  double orientation_gate{10.0};   // degrees from horizontal/vertical
  double intersection_radius_fraction{0.05};  // of max(w,h)
  double circle_radius_fraction{0.1};         // of min(w,h)
  double diagonal_predicate_threshold{0.8};

  void validate() const {
    const auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(line_score_threshold) || !in_unit(intersection_radius_fraction) ||
        !in_unit(circle_radius_fraction) || !in_unit(diagonal_predicate_threshold)) {
      throw Error(ErrorCode::InvalidArgument, "composition fractions must lie in (0,1)");
    }
    if (!(angle_tolerance > 0.0) || !(orientation_gate > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "composition angle tolerances must be positive");
    }
  }
};

struct CompositionFeatures {
  double f1{0.0};   // golden section
  double f2{0.0};   // center
  double f3{0.0};   // slant
  double f4{0.0};   // triangle
  double f5{0.0};   // guideline
  double f6{0.0};   // rule of thirds
  double f7{0.0};   // symmetry
  double f8{0.0};   // diagonal
  double f9{0.0};   // frame
  double f10{0.0};  // circle

  std::array<double, 10> values() const { return {f1, f2, f3, f4, f5, f6, f7, f8, f9, f10}; }
};

struct ImageExtent {
  double width;
  double height;

  static ImageExtent of(const Raster& image) {
    return {static_cast<double>(image.width()), static_cast<double>(image.height())};
  }
  double diagonal() const { return std::hypot(width, height); }
  double long_side() const { return std::max(width, height); }
  double short_side() const { return std::min(width, height); }
};

// ---------------------------------------------------------------------------
// Templates

inline std::array<Point, 4> golden_section_points(ImageExtent e) {
  constexpr double lo = 0.382, hi = 0.618;
  return {Point{lo * e.width, lo * e.height}, Point{hi * e.width, lo * e.height},
          Point{lo * e.width, hi * e.height}, Point{hi * e.width, hi * e.height}};
}

inline Point image_center(ImageExtent e) { return {e.width / 2.0, e.height / 2.0}; }

inline std::array<LineSegment, 2> diagonal_templates(ImageExtent e) {
  return {LineSegment{{0, 0}, {e.width, e.height}}, LineSegment{{e.width, 0}, {0, e.height}}};
}

// Sides of the isosceles triangle standing on the bottom edge.
inline std::array<LineSegment, 2> triangle_templates(ImageExtent e) {
  const Point apex{e.width / 2.0, 0.0};
  return {LineSegment{{0, e.height}, apex}, LineSegment{{e.width, e.height}, apex}};
}

inline std::array<LineSegment, 4> guideline_templates(ImageExtent e) {
  const Point c = image_center(e);
  return {LineSegment{{0, 0}, c}, LineSegment{{e.width, 0}, c}, LineSegment{{0, e.height}, c},
          LineSegment{{e.width, e.height}, c}};
}

inline std::array<LineSegment, 4> thirds_templates(ImageExtent e) {
  const double x1 = e.width / 3.0, x2 = 2.0 * e.width / 3.0;
  const double y1 = e.height / 3.0, y2 = 2.0 * e.height / 3.0;
  return {LineSegment{{x1, 0}, {x1, e.height}}, LineSegment{{x2, 0}, {x2, e.height}},
          LineSegment{{0, y1}, {e.width, y1}}, LineSegment{{0, y2}, {e.width, y2}}};
}

// ---------------------------------------------------------------------------
// Scores

/// 1 - d / diagonal, d the distance between the salient centroid and a target.
inline double point_feature_score(Point centroid, Point target, ImageExtent e) {
  return 1.0 - distance(centroid, target) / e.diagonal();
}

inline double point_feature_score(Point centroid, Point target, const Raster& image) {
  return point_feature_score(centroid, target, ImageExtent::of(image));
}

/// 1 - (d1 + d2) / (2 max(w,h)) under the endpoint pairing with the smaller
/// d1 + d2; floored at 0.
inline double line_match_score(const LineSegment& detected, const LineSegment& templ, ImageExtent e) {
  const double straight = distance(detected.p1, templ.p1) + distance(detected.p2, templ.p2);
  const double crossed = distance(detected.p1, templ.p2) + distance(detected.p2, templ.p1);
  return std::max(0.0, 1.0 - std::min(straight, crossed) / (2.0 * e.long_side()));
}

inline double line_match_score(const LineSegment& detected, const LineSegment& templ, const Raster& image) {
  return line_match_score(detected, templ, ImageExtent::of(image));
}

inline double gate(double score, double threshold) { return score > threshold ? score : 0.0; }

struct PointFeatures {
  double golden{0.0};
  double center{0.0};
};

/// Golden-section and center proximity of the salient centroid. Only the
/// nearer kind survives; ties go to the center.
inline PointFeatures point_features_from_centroid(Point centroid, ImageExtent e, const CompositionConfig& cfg) {
  double golden = 0.0;
  for (const Point& g : golden_section_points(e)) golden = std::max(golden, point_feature_score(centroid, g, e));
  const double center = point_feature_score(centroid, image_center(e), e);
  PointFeatures out;
  if (golden > center) {
    out.golden = gate(golden, cfg.line_score_threshold);
  } else {
    out.center = gate(center, cfg.line_score_threshold);
  }
  return out;
}

inline PointFeatures saliency_point_features(const Raster& image, const PerceptionBundle& bundle,
                                             const CompositionConfig& cfg = {}) {
  return point_features_from_centroid(salient_centroid(bundle.saliency), ImageExtent::of(image), cfg);
}

struct LineTemplateFeatures {
  double slant{0.0};
  double triangle{0.0};
  double guideline{0.0};
  double thirds{0.0};
};

namespace detail {

template <std::size_t N>
double best_match(const std::vector<LineSegment>& lines, const std::array<LineSegment, N>& templates,
                  ImageExtent e) {
  double best = 0.0;
  for (const auto& l : lines) {
    for (const auto& t : templates) best = std::max(best, line_match_score(l, t, e));
  }
  return best;
}

}  // namespace detail

inline LineTemplateFeatures line_template_features(ImageExtent e, const std::vector<LineSegment>& lines,
                                                   const CompositionConfig& cfg = {}) {
  LineTemplateFeatures out;
  if (lines.empty()) return out;
  const double thr = cfg.line_score_threshold;
  out.slant = gate(detail::best_match(lines, diagonal_templates(e), e), thr);
  const auto sides = triangle_templates(e);
  const double left = detail::best_match(lines, std::array<LineSegment, 1>{sides[0]}, e);
  const double right = detail::best_match(lines, std::array<LineSegment, 1>{sides[1]}, e);
  out.triangle = gate((left + right) / 2.0, thr);
  out.guideline = gate(detail::best_match(lines, guideline_templates(e), e), thr);
  out.thirds = gate(detail::best_match(lines, thirds_templates(e), e), thr);
  return out;
}

inline LineTemplateFeatures line_template_features(const Raster& image, const PerceptionBundle& bundle,
                                                   const CompositionConfig& cfg = {}) {
  return line_template_features(ImageExtent::of(image), bundle.lines, cfg);
}

struct PredicateFeatures {
  double symmetry{0.0};
  double diagonal{0.0};
  double frame{0.0};
  double circle{0.0};
};

/// Mirror-image pairs (orientations summing to 180) that cross inside the
/// image, with every crossing inside one small neighbourhood.
inline bool symmetry_predicate(ImageExtent e, const std::vector<LineSegment>& lines, const CompositionConfig& cfg) {
  std::vector<Point> crossings;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double sum = lines[i].angle_degrees() + lines[j].angle_degrees();
      if (std::abs(sum - 180.0) > cfg.angle_tolerance) continue;
      const auto p = line_intersection(lines[i], lines[j]);
      if (!p || p->x < 0.0 || p->y < 0.0 || p->x > e.width || p->y > e.height) continue;
      crossings.push_back(*p);
    }
  }
  if (crossings.size() < 2) return false;
  const double radius = cfg.intersection_radius_fraction * e.long_side();
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    for (std::size_t j = i + 1; j < crossings.size(); ++j) {
      if (distance(crossings[i], crossings[j]) > radius) return false;
    }
  }
  return true;
}

inline bool diagonal_predicate(ImageExtent e, const std::vector<LineSegment>& lines, const CompositionConfig& cfg) {
  const auto diagonals = diagonal_templates(e);
  return std::any_of(lines.begin(), lines.end(), [&](const LineSegment& l) {
    return std::any_of(diagonals.begin(), diagonals.end(), [&](const LineSegment& d) {
      return line_match_score(l, d, e) >= cfg.diagonal_predicate_threshold;
    });
  });
}

/// Two near-axis parallels plus a third line perpendicular to both.
inline bool frame_predicate(const std::vector<LineSegment>& lines, const CompositionConfig& cfg) {
  const auto near_axis = [&](double a) {
    return orientation_difference(a, 0.0) <= cfg.orientation_gate ||
           orientation_difference(a, 90.0) <= cfg.orientation_gate;
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const double ai = lines[i].angle_degrees();
    if (!near_axis(ai)) continue;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double aj = lines[j].angle_degrees();
      if (!near_axis(aj) || orientation_difference(ai, aj) > cfg.angle_tolerance) continue;
      for (std::size_t k = 0; k < lines.size(); ++k) {
        if (k == i || k == j) continue;
        const double ak = lines[k].angle_degrees();
        if (std::abs(orientation_difference(ak, ai) - 90.0) <= cfg.angle_tolerance &&
            std::abs(orientation_difference(ak, aj) - 90.0) <= cfg.angle_tolerance) {
          return true;
        }
      }
    }
  }
  return false;
}

inline bool circle_predicate(ImageExtent e, const std::vector<Circle>& circles, const CompositionConfig& cfg) {
  const double min_radius = cfg.circle_radius_fraction * e.short_side();
  return std::any_of(circles.begin(), circles.end(), [&](const Circle& c) { return c.radius > min_radius; });
}

inline PredicateFeatures predicate_features(ImageExtent e, const std::vector<LineSegment>& lines,
                                            const std::vector<Circle>& circles, const CompositionConfig& cfg = {}) {
  return {symmetry_predicate(e, lines, cfg) ? 1.0 : 0.0, diagonal_predicate(e, lines, cfg) ? 1.0 : 0.0,
          frame_predicate(lines, cfg) ? 1.0 : 0.0, circle_predicate(e, circles, cfg) ? 1.0 : 0.0};
}

inline PredicateFeatures predicate_features(const Raster& image, const PerceptionBundle& bundle,
                                            const CompositionConfig& cfg = {}) {
  return predicate_features(ImageExtent::of(image), bundle.lines, bundle.circles, cfg);
}

inline CompositionFeatures extract_composition_features(const Raster& image, const PerceptionBundle& bundle,
                                                        const CompositionConfig& cfg = {}) {
  cfg.validate();
  if (bundle.saliency.width != image.width() || bundle.saliency.height != image.height() ||
      bundle.saliency.values.size() != image.pixel_count()) {
    throw Error(ErrorCode::DimensionMismatch, "saliency map does not match the image");
  }
  const PointFeatures pf = saliency_point_features(image, bundle, cfg);
  const LineTemplateFeatures lt = line_template_features(image, bundle, cfg);
  const PredicateFeatures pr = predicate_features(image, bundle, cfg);
  return {pf.golden, pf.center, lt.slant, lt.triangle, lt.guideline, lt.thirds,
          pr.symmetry, pr.diagonal, pr.frame, pr.circle};
}

}  // namespace aesthetic
