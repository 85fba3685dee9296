#ifndef SCENGEN_RISK_HPP
#define SCENGEN_RISK_HPP

#include <string>
#include <vector>

#include "scengen/sim.hpp"

namespace scengen {

inline constexpr double kTtcMax = 10.0;        // s, sweep horizon and cap
inline constexpr double kTtcStep = 0.1;        // s, sweep resolution
inline constexpr double kCollisionReward = 100.0;  // weight of one collision

// One collision label: category C1..C6 by impact geometry, severity from
// the speed difference (H above +5 m/s, L below -5 m/s, M between).
struct CollisionClass {
  int category = 1;    // 1..6
  char severity = 'M';  // 'H' | 'M' | 'L'

  bool operator==(const CollisionClass&) const = default;
};

std::string to_string(const CollisionClass& c);       // e.g. "C5-H"
CollisionClass collision_class_from_string(const std::string& s);

// Criticalness summary of one trace.
struct RiskReport {
  double min_ttc_s = kTtcMax;
  int collision_count = 0;
  double adv_raw = 0.0;
  double adv_norm = 0.0;  // in [0, 1]
  std::vector<CollisionClass> collision_types;  // one per collision
};

// Time to collision under constant-velocity extrapolation of both
// footprints, swept at kTtcStep up to kTtcMax; +inf if they never meet,
// 0 if already overlapping.
double ttc_at_step(const VehicleState& ego, const VehicleState& npc,
                   double ego_length = 4.5, double ego_width = 2.0,
                   double npc_length = 4.5, double npc_width = 2.0);

// Minimum pairwise TTC over every step and NPC; kTtcMax when never finite.
// Throws ValidationError on an empty trace.
double min_ttc(const SimulationTrace& trace);

// Collision-count / TTC blend: adv_raw = count * kCollisionReward - min_ttc,
// normalized by the fixed affine map onto [0,1] with C_max = NPC count.
RiskReport adv(const SimulationTrace& trace);

CollisionClass classify_collision(const CollisionEvent& ev);

}  // namespace scengen

#endif  // SCENGEN_RISK_HPP
