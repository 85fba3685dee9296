#ifndef SCENGEN_MAP_HPP
#define SCENGEN_MAP_HPP

#include <map>
#include <string>
#include <vector>

#include "scengen/geometry.hpp"
#include "scengen/scenario.hpp"

namespace scengen {

struct PathPose {
  Vec2 pos;
  double heading = 0.0;
};

// One leg of a route: a line segment or a circular arc. Arcs keep the raw
// (angle0, angle1) pair; the signed sweep angle1 - angle0 encodes direction.
struct PathSegment {
  enum class Kind { straight, arc };
  Kind kind = Kind::straight;
  Vec2 a, b;       // straight endpoints
  Vec2 center;     // arc center
  double radius = 0.0;
  double angle0 = 0.0;
  double angle1 = 0.0;

  double length() const;
};

// Piecewise path parameterized by arc length s in [0, length()].
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<PathSegment> segments);

  double length() const { return total_length_; }
  // Pose at arc length s; s is clamped to [0, length()].
  PathPose pose_at(double s) const;
  // Arc length of the point on the path closest to p, plus that distance.
  double project(Vec2 p, double* distance = nullptr) const;

  const std::vector<PathSegment>& segments() const { return segments_; }

 private:
  std::vector<PathSegment> segments_;
  std::vector<double> cumulative_;  // arc length at each segment start
  double total_length_ = 0.0;
};

// Closest approach between two paths: arc lengths on each plus the gap.
struct PathConflict {
  double s_a = 0.0;
  double s_b = 0.0;
  double distance = 0.0;
};

// Minimum-distance point pair, found by a coarse sweep (2 m) refined to
// 0.05 m. Deterministic for fixed inputs.
PathConflict find_conflict(const Path& a, const Path& b);

// Road network for one map template. Highways run along +x with lane i
// centered at y = 1.75 + 3.5 i; the junction is two perpendicular two-lane
// roads crossing at the origin with 8 m turn arcs.
class RouteMap {
 public:
  static constexpr double kLaneWidth = 3.5;

  static RouteMap build(MapTemplate t);

  const Path& route(const std::string& name) const;  // ValidationError if unknown
  bool has_route(const std::string& name) const;
  // Stable integer id for a route (index in the construction order).
  int route_id(const std::string& name) const;

  MapTemplate map_template() const { return template_; }
  int lane_count() const { return lane_count_; }
  double lane_center_y(int lane) const { return 1.75 + kLaneWidth * lane; }
  // Nearest highway lane index for a y position (clamped to valid lanes).
  int lane_from_y(double y) const;

  // Trace lane label for an actor: highway maps attribute the nearest lane
  // to the position; the junction records the route id.
  int lane_label(const std::string& route_name, Vec2 pos) const;

  const std::vector<std::string>& route_names() const { return names_; }

 private:
  MapTemplate template_ = MapTemplate::highway2;
  int lane_count_ = 0;
  std::vector<std::string> names_;
  std::map<std::string, Path> routes_;
};

}  // namespace scengen

#endif  // SCENGEN_MAP_HPP
