#include "scengen/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scengen/errors.hpp"
#include "scengen/geometry.hpp"

namespace scengen {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDeg = 3.14159265358979323846 / 180.0;
}  // namespace

std::string to_string(const CollisionClass& c) {
  return "C" + std::to_string(c.category) + "-" + std::string(1, c.severity);
}

CollisionClass collision_class_from_string(const std::string& s) {
  if (s.size() == 4 && s[0] == 'C' && s[1] >= '1' && s[1] <= '6' && s[2] == '-' &&
      (s[3] == 'H' || s[3] == 'M' || s[3] == 'L')) {
    return {s[1] - '0', s[3]};
  }
  throw ValidationError("bad collision class '" + s + "' (expected e.g. C1-H)");
}

double ttc_at_step(const VehicleState& ego, const VehicleState& npc, double ego_length,
                   double ego_width, double npc_length, double npc_width) {
  const double evx = ego.speed * std::cos(ego.heading);
  const double evy = ego.speed * std::sin(ego.heading);
  const double nvx = npc.speed * std::cos(npc.heading);
  const double nvy = npc.speed * std::sin(npc.heading);
  const int sweeps = static_cast<int>(std::lround(kTtcMax / kTtcStep));
  for (int k = 0; k <= sweeps; ++k) {
    const double t = k * kTtcStep;
    const OrientedRect a{ego.x + evx * t, ego.y + evy * t, ego.heading, ego_length, ego_width};
    const OrientedRect b{npc.x + nvx * t, npc.y + nvy * t, npc.heading, npc_length, npc_width};
    if (sat_overlap(a, b)) return t;
  }
  return kInf;
}

double min_ttc(const SimulationTrace& trace) {
  if (trace.steps.empty()) throw ValidationError("min_ttc needs a non-empty trace");
  if (trace.actors.empty() || trace.actors[0].role != ActorRole::ego) {
    throw ValidationError("trace actor list must start with the ego");
  }
  double best = kInf;
  for (const auto& snap : trace.steps) {
    const VehicleState& ego = snap.actors[0];
    for (std::size_t i = 1; i < snap.actors.size(); ++i) {
      const ActorInfo& einfo = trace.actors[0];
      const ActorInfo& ninfo = trace.actors[i];
      best = std::min(best, ttc_at_step(ego, snap.actors[i], einfo.length_m, einfo.width_m,
                                        ninfo.length_m, ninfo.width_m));
      if (best == 0.0) return 0.0;
    }
  }
  return std::min(best, kTtcMax);
}

RiskReport adv(const SimulationTrace& trace) {
  RiskReport report;
  report.min_ttc_s = min_ttc(trace);
  report.collision_count = static_cast<int>(trace.collisions.size());
  report.adv_raw = report.collision_count * kCollisionReward - report.min_ttc_s;
  const int c_max = trace.npc_count();
  const double denom = c_max * kCollisionReward + kTtcMax;
  report.adv_norm = std::clamp((report.adv_raw + kTtcMax) / denom, 0.0, 1.0);
  report.collision_types.reserve(trace.collisions.size());
  for (const auto& ev : trace.collisions) {
    report.collision_types.push_back(classify_collision(ev));
  }
  return report;
}

CollisionClass classify_collision(const CollisionEvent& ev) {
  CollisionClass out;
  const double dv = ev.npc_speed - ev.ego_speed;
  out.severity = dv > 5.0 ? 'H' : (dv < -5.0 ? 'L' : 'M');

  const double beta = std::atan2(ev.impact_y_m, ev.impact_x_m);  // impact bearing
  const double rel = std::abs(normalize_angle(ev.relative_heading));
  // The NPC's velocity component across the ego's axis; nonzero mid-lane-change.
  const double lateral_speed = ev.npc_speed * std::abs(std::sin(ev.relative_heading));

  if (rel >= 45.0 * kDeg && rel <= 135.0 * kDeg) {
    out.category = 6;  // crossing / angled impact
  } else if (std::abs(beta) <= 120.0 * kDeg && lateral_speed > 0.3) {
    out.category = 5;  // cutoff: front/side impact while the NPC changes lanes
  } else if (std::abs(beta) <= 30.0 * kDeg) {
    out.category = 1;  // frontal
  } else if (std::abs(beta) >= 150.0 * kDeg) {
    out.category = 2;  // rear
  } else if (beta > 0.0) {
    out.category = 3;  // left side
  } else {
    out.category = 4;  // right side
  }
  return out;
}

}  // namespace scengen
