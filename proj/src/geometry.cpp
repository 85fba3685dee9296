#include "scengen/geometry.hpp"

#include <array>

namespace scengen {

namespace {

struct Frame {
  Vec2 ux;  // unit vector along heading
  Vec2 uy;  // unit vector across heading
  double hl;
  double hw;
};

Frame frame_of(const OrientedRect& r) {
  const double c = std::cos(r.heading);
  const double s = std::sin(r.heading);
  return {{c, s}, {-s, c}, 0.5 * r.length, 0.5 * r.width};
}

// Projected radius of a rectangle onto a unit axis.
double radius_on(const Frame& f, const Vec2& axis) {
  return f.hl * std::abs(f.ux.dot(axis)) + f.hw * std::abs(f.uy.dot(axis));
}

}  // namespace

bool sat_overlap(const OrientedRect& a, const OrientedRect& b) {
  const Frame fa = frame_of(a);
  const Frame fb = frame_of(b);
  const Vec2 d{b.cx - a.cx, b.cy - a.cy};

  const std::array<Vec2, 4> axes{fa.ux, fa.uy, fb.ux, fb.uy};
  for (const Vec2& axis : axes) {
    if (std::abs(d.dot(axis)) > radius_on(fa, axis) + radius_on(fb, axis)) {
      return false;  // found a separating axis
    }
  }
  return true;
}

}  // namespace scengen
