#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace aesthetic {

struct Point {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Detected or template line segment in pixel coordinates (y grows downward).
struct LineSegment {
  Point p1;
  Point p2;
  double strength{0.0};

  double length() const { return distance(p1, p2); }

  /// Orientation against the image x axis, folded into [0,180).
  double angle_degrees() const {
    double a = std::atan2(p2.y - p1.y, p2.x - p1.x) * 180.0 / std::numbers::pi;
    if (a < 0.0) a += 180.0;
    if (a >= 180.0) a -= 180.0;
    return a;
  }

  Point midpoint() const { return {(p1.x + p2.x) / 2.0, (p1.y + p2.y) / 2.0}; }
};

struct Circle {
  Point center;
  double radius{0.0};
};

/// Smallest difference between two orientations taken modulo 180 degrees.
inline double orientation_difference(double a, double b) {
  double d = std::fmod(std::abs(a - b), 180.0);
  return std::min(d, 180.0 - d);
}

/// Intersection of the infinite lines through two segments, if not parallel.
inline std::optional<Point> line_intersection(const LineSegment& a, const LineSegment& b) {
  const double dx1 = a.p2.x - a.p1.x, dy1 = a.p2.y - a.p1.y;
  const double dx2 = b.p2.x - b.p1.x, dy2 = b.p2.y - b.p1.y;
  const double denom = dx1 * dy2 - dy1 * dx2;
  const double scale = std::hypot(dx1, dy1) * std::hypot(dx2, dy2);
  if (scale == 0.0 || std::abs(denom) <= 1e-12 * scale) return std::nullopt;
  const double t = ((b.p1.x - a.p1.x) * dy2 - (b.p1.y - a.p1.y) * dx2) / denom;
  return Point{a.p1.x + t * dx1, a.p1.y + t * dy1};
}

/// Perpendicular distance from a point to the infinite line through a segment.
inline double distance_to_line(Point p, const LineSegment& s) {
  const double len = s.length();
  if (len == 0.0) return distance(p, s.p1);
  return std::abs((s.p2.x - s.p1.x) * (s.p1.y - p.y) - (s.p1.x - p.x) * (s.p2.y - s.p1.y)) / len;
}

}  // namespace aesthetic
