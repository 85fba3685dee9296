#include "scengen/map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scengen/errors.hpp"

namespace scengen {

namespace {
constexpr double kPi = 3.14159265358979323846;

PathSegment straight(Vec2 a, Vec2 b) {
  PathSegment s;
  s.kind = PathSegment::Kind::straight;
  s.a = a;
  s.b = b;
  return s;
}

PathSegment arc(Vec2 center, double radius, double angle0, double angle1) {
  PathSegment s;
  s.kind = PathSegment::Kind::arc;
  s.center = center;
  s.radius = radius;
  s.angle0 = angle0;
  s.angle1 = angle1;
  return s;
}
}  // namespace

double PathSegment::length() const {
  if (kind == Kind::straight) return (b - a).norm();
  return std::abs(angle1 - angle0) * radius;
}

Path::Path(std::vector<PathSegment> segments) : segments_(std::move(segments)) {
  cumulative_.reserve(segments_.size());
  for (const auto& seg : segments_) {
    cumulative_.push_back(total_length_);
    total_length_ += seg.length();
  }
}

PathPose Path::pose_at(double s) const {
  if (segments_.empty()) throw ValidationError("pose_at on an empty path");
  s = std::clamp(s, 0.0, total_length_);
  std::size_t i = segments_.size() - 1;
  while (i > 0 && s < cumulative_[i]) --i;
  const PathSegment& seg = segments_[i];
  double local = s - cumulative_[i];
  double len = seg.length();
  double t = len > 0.0 ? std::clamp(local / len, 0.0, 1.0) : 0.0;
  PathPose pose;
  if (seg.kind == PathSegment::Kind::straight) {
    pose.pos = seg.a + (seg.b - seg.a) * t;
    pose.heading = std::atan2(seg.b.y - seg.a.y, seg.b.x - seg.a.x);
  } else {
    double sweep = seg.angle1 - seg.angle0;
    double theta = seg.angle0 + sweep * t;
    pose.pos = seg.center + Vec2{std::cos(theta), std::sin(theta)} * seg.radius;
    pose.heading = normalize_angle(theta + (sweep >= 0.0 ? kPi / 2.0 : -kPi / 2.0));
  }
  return pose;
}

double Path::project(Vec2 p, double* distance) const {
  if (segments_.empty()) throw ValidationError("project on an empty path");
  double best_s = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const PathSegment& seg = segments_[i];
    double local_s;
    Vec2 q;
    if (seg.kind == PathSegment::Kind::straight) {
      Vec2 dir = seg.b - seg.a;
      double len = dir.norm();
      double t = len > 0.0 ? std::clamp((p - seg.a).dot(dir) / (len * len), 0.0, 1.0) : 0.0;
      q = seg.a + dir * t;
      local_s = t * len;
    } else {
      double sweep = seg.angle1 - seg.angle0;
      double theta = std::atan2(p.y - seg.center.y, p.x - seg.center.x);
      // Angle travelled from angle0 in the sweep direction, in [0, 2*pi).
      double travelled = sweep >= 0.0 ? theta - seg.angle0 : seg.angle0 - theta;
      travelled = std::fmod(travelled, 2.0 * kPi);
      if (travelled < 0.0) travelled += 2.0 * kPi;
      double t = std::abs(sweep) > 0.0 ? travelled / std::abs(sweep) : 0.0;
      if (t > 1.0) {
        // Off the arc: closer endpoint wins.
        Vec2 p0 = seg.center + Vec2{std::cos(seg.angle0), std::sin(seg.angle0)} * seg.radius;
        Vec2 p1 = seg.center + Vec2{std::cos(seg.angle1), std::sin(seg.angle1)} * seg.radius;
        t = (p - p0).norm() <= (p - p1).norm() ? 0.0 : 1.0;
      }
      double theta_on = seg.angle0 + sweep * t;
      q = seg.center + Vec2{std::cos(theta_on), std::sin(theta_on)} * seg.radius;
      local_s = t * seg.length();
    }
    double d = (p - q).norm();
    if (d < best_d) {
      best_d = d;
      best_s = cumulative_[i] + local_s;
    }
  }
  if (distance) *distance = best_d;
  return best_s;
}

PathConflict find_conflict(const Path& a, const Path& b) {
  auto scan = [&](double lo_a, double hi_a, double lo_b, double hi_b, double step) {
    PathConflict best;
    best.distance = std::numeric_limits<double>::infinity();
    for (double sa = lo_a; sa <= hi_a + 1e-9; sa += step) {
      Vec2 pa = a.pose_at(sa).pos;
      for (double sb = lo_b; sb <= hi_b + 1e-9; sb += step) {
        double d = (pa - b.pose_at(sb).pos).norm();
        if (d < best.distance) {
          best.distance = d;
          best.s_a = sa;
          best.s_b = sb;
        }
      }
    }
    return best;
  };
  PathConflict coarse = scan(0.0, a.length(), 0.0, b.length(), 2.0);
  return scan(std::max(0.0, coarse.s_a - 2.0), std::min(a.length(), coarse.s_a + 2.0),
              std::max(0.0, coarse.s_b - 2.0), std::min(b.length(), coarse.s_b + 2.0), 0.05);
}

namespace {
// Highway routes span well past anything a 20 s horizon can reach.
constexpr double kHighwayStartX = -200.0;
constexpr double kHighwayEndX = 1200.0;
constexpr double kJunctionArm = 150.0;
constexpr double kTurnRadius = 8.0;
}  // namespace

RouteMap RouteMap::build(MapTemplate t) {
  RouteMap m;
  m.template_ = t;
  auto add = [&m](const std::string& name, std::vector<PathSegment> segs) {
    m.names_.push_back(name);
    m.routes_.emplace(name, Path(std::move(segs)));
  };
  if (t == MapTemplate::highway2 || t == MapTemplate::highway3) {
    m.lane_count_ = t == MapTemplate::highway2 ? 2 : 3;
    for (int lane = 0; lane < m.lane_count_; ++lane) {
      double y = m.lane_center_y(lane);
      add("lane" + std::to_string(lane),
          {straight({kHighwayStartX, y}, {kHighwayEndX, y})});
    }
    return m;
  }
  // Four-way junction, right-hand traffic: each road has one lane per
  // direction, centered 1.75 m from the road axis.
  m.lane_count_ = 0;
  const double h = kLaneWidth / 2.0;  // 1.75
  add("south_north", {straight({h, -kJunctionArm}, {h, kJunctionArm})});
  add("north_south", {straight({-h, kJunctionArm}, {-h, -kJunctionArm})});
  add("west_east", {straight({-kJunctionArm, -h}, {kJunctionArm, -h})});
  add("east_west", {straight({kJunctionArm, h}, {-kJunctionArm, h})});
  // Left turn from the south approach onto the westbound lane: counter-
  // clockwise quarter arc, tangent to both straights.
  add("south_west_left",
      {straight({h, -kJunctionArm}, {h, h - kTurnRadius}),
       arc({h - kTurnRadius, h - kTurnRadius}, kTurnRadius, 0.0, kPi / 2.0),
       straight({h - kTurnRadius, h}, {-kJunctionArm, h})});
  // Right turn from the south approach onto the eastbound lane: clockwise
  // quarter arc.
  add("south_east_right",
      {straight({h, -kJunctionArm}, {h, -h - kTurnRadius}),
       arc({h + kTurnRadius, -h - kTurnRadius}, kTurnRadius, kPi, kPi / 2.0),
       straight({h + kTurnRadius, -h}, {kJunctionArm, -h})});
  return m;
}

const Path& RouteMap::route(const std::string& name) const {
  auto it = routes_.find(name);
  if (it == routes_.end()) {
    throw ValidationError("unknown route '" + name + "' on map " + to_string(template_));
  }
  return it->second;
}

bool RouteMap::has_route(const std::string& name) const { return routes_.count(name) > 0; }

int RouteMap::route_id(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  throw ValidationError("unknown route '" + name + "' on map " + to_string(template_));
}

int RouteMap::lane_from_y(double y) const {
  if (lane_count_ <= 0) return 0;
  int lane = static_cast<int>(std::lround((y - 1.75) / kLaneWidth));
  return std::clamp(lane, 0, lane_count_ - 1);
}

int RouteMap::lane_label(const std::string& route_name, Vec2 pos) const {
  if (template_ == MapTemplate::junction4way) return route_id(route_name);
  return lane_from_y(pos.y);
}

}  // namespace scengen
