#ifndef SCENGEN_SIM_HPP
#define SCENGEN_SIM_HPP

#include <ostream>
#include <string>
#include <vector>

#include "scengen/scenario.hpp"

namespace scengen {

struct VehicleState {
  std::string actor_id;
  double x = 0.0;        // m
  double y = 0.0;        // m
  double heading = 0.0;  // rad, normalized to (-pi, pi]
  double speed = 0.0;    // m/s, >= 0
  int lane = 0;          // highway lane index, or route id at the junction
};

struct Snapshot {
  double time_s = 0.0;
  std::vector<VehicleState> actors;  // same order as SimulationTrace::actors
};

// Static per-actor data the per-step states do not repeat.
struct ActorInfo {
  std::string id;
  ActorRole role = ActorRole::npc;
  std::string route;
  double length_m = 4.5;
  double width_m = 2.0;
};

// First contact between the ego and one NPC; at most one per NPC per trace.
struct CollisionEvent {
  double time_s = 0.0;
  std::string npc_id;
  double impact_x_m = 0.0;  // impact point in the ego frame (x ahead, y left)
  double impact_y_m = 0.0;
  double ego_speed = 0.0;
  double npc_speed = 0.0;
  double relative_heading = 0.0;  // npc heading minus ego heading, normalized
};

struct SimulationTrace {
  std::string ls_id;
  double dt_s = 0.1;
  std::vector<ActorInfo> actors;  // [0] is the ego
  std::vector<Snapshot> steps;
  std::vector<CollisionEvent> collisions;
  double ego_distance_m = 0.0;
  double sim_time_s = 0.0;  // (steps.size() - 1) * dt_s

  int npc_count() const { return static_cast<int>(actors.size()) - 1; }
};

// The scripted maneuver family a scenario drives, recognized from its
// parameter names (see the catalog). ValidationError when none matches.
enum class ScenarioProfile { lead_brake, cut_in, junction_cross };
ScenarioProfile scenario_profile(const LogicalScenario& ls);

// Car-following acceleration. v: own speed, v0: desired speed, gap: bumper
// gap to the leader (+inf for none), dv: closing speed (own minus leader).
// Returns the demanded acceleration clamped to [-kIdmBrakeMax, kIdmAccelMax];
// gap <= 0 is an emergency and returns -kIdmBrakeMax.
double idm_accel(double v, double v0, double gap, double dv);

inline constexpr double kIdmAccelMax = 2.0;     // m/s^2
inline constexpr double kIdmBrakeComfort = 4.0; // m/s^2, shapes the gap term
inline constexpr double kIdmBrakeMax = 9.0;     // m/s^2, physical limit
inline constexpr double kIdmMinGap = 2.0;       // m
inline constexpr double kIdmHeadway = 1.5;      // s

// Run one scenario to its horizon (or 1 s past first contact). Fixed-step
// Euler at ls.dt_s; deterministic function of (ls, cs).
SimulationTrace simulate(const LogicalScenario& ls, const ConcreteScenario& cs);

// Step-level CSV (`time,actor_id,x,y,heading,speed,lane`) followed by a
// `#collisions` block; exact layout documented in the README.
void write_trace_csv(const SimulationTrace& trace, std::ostream& os);
std::string trace_to_csv(const SimulationTrace& trace);

}  // namespace scengen

#endif  // SCENGEN_SIM_HPP
