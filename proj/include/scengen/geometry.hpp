#ifndef SCENGEN_GEOMETRY_HPP
#define SCENGEN_GEOMETRY_HPP

#include <cmath>
#include <numbers>

namespace scengen {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

// Normalize an angle to (-pi, pi].
inline double normalize_angle(double rad) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(rad, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

// Center pose plus full extents of a vehicle footprint.
struct OrientedRect {
  double cx = 0.0;
  double cy = 0.0;
  double heading = 0.0;  // rad
  double length = 4.5;   // extent along heading, m
  double width = 2.0;    // extent across heading, m
};

// Separating-axis test for two oriented rectangles. Four candidate axes
// (two per rectangle); touching counts as overlapping.
bool sat_overlap(const OrientedRect& a, const OrientedRect& b);

}  // namespace scengen

#endif  // SCENGEN_GEOMETRY_HPP
