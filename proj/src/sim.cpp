#include "scengen/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "scengen/errors.hpp"
#include "scengen/format.hpp"
#include "scengen/geometry.hpp"
#include "scengen/map.hpp"

namespace scengen {

double idm_accel(double v, double v0, double gap, double dv) {
  if (gap <= 0.0) return -kIdmBrakeMax;  // emergency: leader overlaps or touches
  v0 = std::max(v0, 0.1);
  const double s_star = kIdmMinGap + v * kIdmHeadway +
                        v * dv / (2.0 * std::sqrt(kIdmAccelMax * kIdmBrakeComfort));
  const double a = kIdmAccelMax *
                   (1.0 - std::pow(v / v0, 4.0) - (s_star / gap) * (s_star / gap));
  return std::clamp(a, -kIdmBrakeMax, kIdmAccelMax);
}

ScenarioProfile scenario_profile(const LogicalScenario& ls) {
  if (ls.param_index("brake_trigger_time") >= 0 && ls.param_index("npc_init_gap") >= 0) {
    return ScenarioProfile::lead_brake;
  }
  if (ls.param_index("cutin_trigger_gap") >= 0) return ScenarioProfile::cut_in;
  if (ls.param_index("ego_init_dist_to_conflict") >= 0 &&
      ls.map_template == MapTemplate::junction4way) {
    return ScenarioProfile::junction_cross;
  }
  throw ValidationError("scenario '" + ls.id +
                        "' matches no supported behavior profile (need the "
                        "lead-brake, cut-in, or junction parameter set)");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Actor {
  ActorInfo info;
  bool on_route = false;  // on_route: position derives from s along `path`
  const Path* path = nullptr;
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;

  // lead-brake script
  bool brakes = false;
  double brake_time = 0.0;
  double brake_decel = 0.0;

  // cut-in script
  bool cuts_in = false;
  double cut_trigger_gap = 0.0;
  double cut_duration = 0.0;
  double cut_target_speed = 0.0;
  double lane_y_from = 0.0;
  double lane_y_to = 0.0;
  bool cut_started = false;
  double cut_t0 = 0.0;
  double cut_v0 = 0.0;

  OrientedRect rect() const { return {x, y, heading, info.length_m, info.width_m}; }
};

double smooth_step(double t) { return t * t * (3.0 - 2.0 * t); }
double smooth_step_rate(double t) { return 6.0 * t * (1.0 - t); }

// Neat snapshot times: k/10 prints as "0.3" where k*0.1 would not.
double step_time(int k, double dt) {
  const double per_second = 1.0 / dt;
  const double rounded = std::round(per_second);
  if (std::abs(per_second - rounded) < 1e-9 && rounded > 0.0) {
    return static_cast<double>(k) / rounded;
  }
  return static_cast<double>(k) * dt;
}

void place_on_route(Actor& a) {
  PathPose pose = a.path->pose_at(a.s);
  a.x = pose.pos.x;
  a.y = pose.pos.y;
  a.heading = pose.heading;
}

}  // namespace

SimulationTrace simulate(const LogicalScenario& ls, const ConcreteScenario& cs) {
  ls.validate();
  if (static_cast<int>(cs.values.size()) != ls.dim()) {
    throw ValidationError("scenario '" + ls.id + "' takes " + std::to_string(ls.dim()) +
                          " values, got " + std::to_string(cs.values.size()));
  }
  const ScenarioProfile profile = scenario_profile(ls);
  const RouteMap map = RouteMap::build(ls.map_template);

  auto value = [&](const char* name) {
    int i = ls.param_index(name);
    if (i < 0) throw ValidationError("scenario '" + ls.id + "' lacks parameter '" + name + "'");
    return cs.values[static_cast<std::size_t>(i)];
  };

  // Actors: ego first, then NPCs in template order.
  std::vector<Actor> actors;
  const ActorTemplate& ego_tmpl = ls.ego_actor();
  auto add_actor = [&](const ActorTemplate& t) {
    Actor a;
    a.info = {t.id, t.role, t.route, t.length_m, t.width_m};
    actors.push_back(a);
  };
  add_actor(ego_tmpl);
  for (const auto& t : ls.actors) {
    if (t.role == ActorRole::npc) add_actor(t);
  }
  Actor& ego = actors[0];
  ego.on_route = true;
  ego.path = &map.route(ego_tmpl.route);
  const double ego_v0 = value("ego_init_speed");
  ego.speed = ego_v0;

  // Junction bookkeeping: conflict arc lengths per crossing NPC.
  struct Crossing {
    double ego_s = 0.0;
    double npc_s = 0.0;
  };
  std::vector<Crossing> crossing(actors.size());

  switch (profile) {
    case ScenarioProfile::lead_brake: {
      ego.s = ego.path->project({0.0, map.lane_center_y(0)});
      Actor& npc = actors[1];
      npc.on_route = true;
      npc.path = &map.route(npc.info.route);
      const double center_gap =
          value("npc_init_gap") + 0.5 * (ego.info.length_m + npc.info.length_m);
      npc.s = ego.s + center_gap;
      npc.speed = value("npc_init_speed");
      npc.brakes = true;
      npc.brake_time = value("brake_trigger_time");
      npc.brake_decel = value("brake_decel");
      break;
    }
    case ScenarioProfile::cut_in: {
      ego.s = ego.path->project({0.0, map.lane_center_y(0)});
      Actor& npc = actors[1];
      npc.x = value("npc_init_long_offset");
      npc.y = map.lane_center_y(1);
      npc.speed = value("npc_init_speed");
      npc.cuts_in = true;
      npc.cut_trigger_gap = value("cutin_trigger_gap");
      npc.cut_duration = std::max(value("cutin_duration"), 1e-3);
      npc.cut_target_speed = value("npc_target_speed");
      npc.lane_y_from = npc.y;
      npc.lane_y_to = map.lane_center_y(0);
      if (actors.size() > 2) {  // trailing vehicle holding the adjacent lane
        Actor& rear = actors[2];
        rear.x = value("npc2_init_long_offset");
        rear.y = map.lane_center_y(1);
        rear.speed = value("npc2_speed");
      }
      break;
    }
    case ScenarioProfile::junction_cross: {
      Actor& npc = actors[1];
      npc.on_route = true;
      npc.path = &map.route(npc.info.route);
      PathConflict conflict = find_conflict(*ego.path, *npc.path);
      crossing[1] = {conflict.s_a, conflict.s_b};
      ego.s = conflict.s_a - value("ego_init_dist_to_conflict");
      npc.s = conflict.s_b - value("npc_init_dist_to_conflict");
      npc.speed = value("npc_speed");
      break;
    }
  }
  for (Actor& a : actors) {
    if (a.on_route) place_on_route(a);
  }

  SimulationTrace trace;
  trace.ls_id = ls.id;
  trace.dt_s = ls.dt_s;
  for (const Actor& a : actors) trace.actors.push_back(a.info);

  const double dt = ls.dt_s;
  const int max_steps = ls.step_count();
  double stop_time = step_time(max_steps, dt);
  std::vector<bool> collided(actors.size(), false);

  auto record_snapshot = [&](double t) {
    Snapshot snap;
    snap.time_s = t;
    for (const Actor& a : actors) {
      VehicleState st;
      st.actor_id = a.info.id;
      st.x = a.x;
      st.y = a.y;
      st.heading = normalize_angle(a.heading);
      st.speed = a.speed;
      st.lane = map.lane_label(a.info.route, {a.x, a.y});
      snap.actors.push_back(std::move(st));
    }
    trace.steps.push_back(std::move(snap));
  };

  auto check_collisions = [&](double t) {
    for (std::size_t i = 1; i < actors.size(); ++i) {
      if (collided[i]) continue;
      const Actor& npc = actors[i];
      if (!sat_overlap(ego.rect(), npc.rect())) continue;
      collided[i] = true;
      CollisionEvent ev;
      ev.time_s = t;
      ev.npc_id = npc.info.id;
      // Approximate contact location: midpoint of the two centers, rotated
      // into the ego frame (x ahead, y to the left).
      const double dx = 0.5 * (npc.x - ego.x);
      const double dy = 0.5 * (npc.y - ego.y);
      const double c = std::cos(ego.heading);
      const double s = std::sin(ego.heading);
      ev.impact_x_m = c * dx + s * dy;
      ev.impact_y_m = -s * dx + c * dy;
      ev.ego_speed = ego.speed;
      ev.npc_speed = npc.speed;
      ev.relative_heading = normalize_angle(npc.heading - ego.heading);
      const bool first = trace.collisions.empty();
      trace.collisions.push_back(ev);
      if (first) stop_time = std::min(stop_time, t + 1.0);
    }
  };

  record_snapshot(0.0);
  check_collisions(0.0);

  for (int k = 1; k <= max_steps; ++k) {
    const double t_prev = step_time(k - 1, dt);
    const double t_now = step_time(k, dt);
    if (t_prev >= stop_time - 1e-9) break;

    // --- ego leader selection -------------------------------------------
    double best_gap = kInf;
    double leader_dv = 0.0;
    for (std::size_t i = 1; i < actors.size(); ++i) {
      const Actor& npc = actors[i];
      double lateral = 0.0;
      const double s_npc = ego.path->project({npc.x, npc.y}, &lateral);
      if (lateral >= 0.5 * (RouteMap::kLaneWidth + npc.info.width_m)) continue;
      if (s_npc <= ego.s) continue;
      const double gap = s_npc - ego.s - 0.5 * (ego.info.length_m + npc.info.length_m);
      if (gap < best_gap) {
        best_gap = gap;
        const double path_heading = ego.path->pose_at(s_npc).heading;
        leader_dv = ego.speed - npc.speed * std::cos(npc.heading - path_heading);
      }
    }
    if (profile == ScenarioProfile::junction_cross) {
      // Yield rule: brake for the conflict point while any crossing NPC's
      // predicted arrival (constant speed, +-1.5 s window) overlaps ours
      // and that NPC has not yet cleared the conflict.
      const double ego_conflict_gap = crossing[1].ego_s - ego.s - 0.5 * ego.info.length_m;
      if (ego_conflict_gap > 0.5) {
        for (std::size_t i = 1; i < actors.size(); ++i) {
          const Actor& npc = actors[i];
          if (!npc.on_route) continue;
          const double npc_cleared_s = crossing[i].npc_s + 0.5 * npc.info.length_m + 1.0;
          if (npc.s >= npc_cleared_s) continue;
          const double t_ego = (crossing[i].ego_s - ego.s) / std::max(ego.speed, 0.1);
          const double t_npc = (crossing[i].npc_s - npc.s) / std::max(npc.speed, 0.1);
          if (std::abs(t_ego - t_npc) <= 3.0 && ego_conflict_gap < best_gap) {
            best_gap = ego_conflict_gap;
            leader_dv = ego.speed;  // virtual leader is stationary
          }
        }
      }
    }
    const double ego_accel = idm_accel(ego.speed, ego_v0, best_gap, leader_dv);

    // --- advance --------------------------------------------------------
    const double ego_ds = std::min(ego.speed * dt, ego.path->length() - ego.s);
    ego.s += ego_ds;
    trace.ego_distance_m += ego_ds;
    ego.speed = std::max(0.0, ego.speed + ego_accel * dt);
    place_on_route(ego);

    for (std::size_t i = 1; i < actors.size(); ++i) {
      Actor& npc = actors[i];
      if (npc.on_route) {
        npc.s = std::min(npc.s + npc.speed * dt, npc.path->length());
        if (npc.brakes && t_prev >= npc.brake_time - 1e-9) {
          npc.speed = std::max(0.0, npc.speed - npc.brake_decel * dt);
        }
        place_on_route(npc);
        continue;
      }
      // Cartesian highway NPC.
      if (npc.cuts_in && !npc.cut_started && npc.x - ego.x <= npc.cut_trigger_gap) {
        npc.cut_started = true;
        npc.cut_t0 = t_prev;
        npc.cut_v0 = npc.speed;
      }
      double vx = npc.speed;
      double vy = 0.0;
      if (npc.cut_started) {
        const double tau_prev =
            std::clamp((t_prev - npc.cut_t0) / npc.cut_duration, 0.0, 1.0);
        const double tau_now =
            std::clamp((t_now - npc.cut_t0) / npc.cut_duration, 0.0, 1.0);
        const double span = npc.lane_y_to - npc.lane_y_from;
        vx = npc.cut_v0 + (npc.cut_target_speed - npc.cut_v0) * tau_prev;
        npc.x += vx * dt;
        npc.y = npc.lane_y_from + span * smooth_step(tau_now);
        vy = span * smooth_step_rate(tau_now) / npc.cut_duration;
        npc.heading = std::atan2(vy, std::max(vx, 0.1));
        npc.speed = std::hypot(vx, vy);
      } else {
        npc.x += vx * dt;
        npc.heading = 0.0;
      }
    }

    record_snapshot(t_now);
    check_collisions(t_now);
  }

  trace.sim_time_s = step_time(static_cast<int>(trace.steps.size()) - 1, dt);
  return trace;
}

void write_trace_csv(const SimulationTrace& trace, std::ostream& os) {
  os << "time,actor_id,x,y,heading,speed,lane\n";
  for (const auto& snap : trace.steps) {
    for (const auto& v : snap.actors) {
      os << format_double(snap.time_s) << ',' << v.actor_id << ',' << format_double(v.x)
         << ',' << format_double(v.y) << ',' << format_double(v.heading) << ','
         << format_double(v.speed) << ',' << v.lane << '\n';
    }
  }
  os << "#collisions\n";
  os << "time,npc_id,impact_x,impact_y,ego_speed,npc_speed,relative_heading\n";
  for (const auto& c : trace.collisions) {
    os << format_double(c.time_s) << ',' << c.npc_id << ',' << format_double(c.impact_x_m)
       << ',' << format_double(c.impact_y_m) << ',' << format_double(c.ego_speed) << ','
       << format_double(c.npc_speed) << ',' << format_double(c.relative_heading) << '\n';
  }
}

std::string trace_to_csv(const SimulationTrace& trace) {
  std::ostringstream os;
  write_trace_csv(trace, os);
  return os.str();
}

}  // namespace scengen
