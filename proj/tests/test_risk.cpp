#include "scengen/risk.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <vector>

#include "scengen/errors.hpp"
#include "scengen/rng.hpp"
#include "scengen/sim.hpp"

using scengen::adv;
using scengen::classify_collision;
using scengen::CollisionClass;
using scengen::collision_class_from_string;
using scengen::CollisionEvent;
using scengen::kTtcMax;
using scengen::min_ttc;
using scengen::RiskReport;
using scengen::RngStream;
using scengen::SimulationTrace;
using scengen::Snapshot;
using scengen::ttc_at_step;
using scengen::ValidationError;
using scengen::VehicleState;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

VehicleState state(double x, double y, double heading, double speed) {
  VehicleState s;
  s.x = x;
  s.y = y;
  s.heading = heading;
  s.speed = speed;
  return s;
}

// Single-step trace with one NPC; collision events appended by the caller.
SimulationTrace one_step_trace(const VehicleState& ego, const VehicleState& npc) {
  SimulationTrace t;
  t.actors.resize(2);
  t.actors[0].id = "ego";
  t.actors[0].role = scengen::ActorRole::ego;
  t.actors[1].id = "npc1";
  t.actors[1].role = scengen::ActorRole::npc;
  Snapshot snap;
  snap.time_s = 0.0;
  snap.actors = {ego, npc};
  t.steps.push_back(snap);
  t.sim_time_s = 0.0;
  return t;
}

CollisionEvent event(double ix, double iy, double rel, double ego_speed, double npc_speed) {
  CollisionEvent ev;
  ev.impact_x_m = ix;
  ev.impact_y_m = iy;
  ev.relative_heading = rel;
  ev.ego_speed = ego_speed;
  ev.npc_speed = npc_speed;
  return ev;
}

}  // namespace

TEST(Ttc, LeadVehicleSweepMatchesAnalytic) {
  // Bumper gap 45.5 m (centers 50 m, two 2.25 m half-lengths), closing
  // 10 m/s: contact at 4.55 s; the 0.1 s sweep lands on 4.5 or 4.6.
  const double ttc = ttc_at_step(state(0, 0, 0, 20), state(50, 0, 0, 10));
  EXPECT_NEAR(ttc, 4.55, 0.1);
  EXPECT_TRUE(std::abs(ttc - 4.5) < 1e-9 || std::abs(ttc - 4.6) < 1e-9) << ttc;
}

TEST(Ttc, ZeroAtContact) {
  EXPECT_DOUBLE_EQ(ttc_at_step(state(0, 0, 0, 20), state(4.0, 0, 0, 0)), 0.0);
}

TEST(Ttc, InfiniteWhenDiverging) {
  EXPECT_EQ(ttc_at_step(state(0, 0, 0, 10), state(20, 0, 0, 25)), kInf);
}

TEST(Ttc, InfiniteForLateralOffsetDiverging) {
  EXPECT_EQ(ttc_at_step(state(0, 0, 0, 15), state(0, 7, 0, 20)), kInf);
}

TEST(Ttc, InfiniteWhenBothStoppedApart) {
  EXPECT_EQ(ttc_at_step(state(0, 0, 0, 0), state(30, 0, 0, 0)), kInf);
}

TEST(Ttc, CrossingPathsConverge) {
  // NPC heading +y from below the ego's lane; paths meet near the origin.
  const double ttc = ttc_at_step(state(-40, 0, 0, 10), state(0, -40, kPi / 2.0, 10));
  EXPECT_TRUE(std::isfinite(ttc));
  EXPECT_GT(ttc, 2.0);
  EXPECT_LT(ttc, 5.0);
}

TEST(MinTtc, EmptyTraceThrows) {
  SimulationTrace t;
  EXPECT_THROW(min_ttc(t), ValidationError);
}

TEST(MinTtc, CappedForParallelTraffic) {
  SimulationTrace t = one_step_trace(state(0, 0, 0, 20), state(0, 7, 0, 20));
  for (int k = 1; k < 10; ++k) {
    Snapshot snap;
    snap.time_s = 0.1 * k;
    snap.actors = {state(2.0 * k, 0, 0, 20), state(2.0 * k, 7, 0, 20)};
    t.steps.push_back(snap);
  }
  EXPECT_DOUBLE_EQ(min_ttc(t), kTtcMax);
}

TEST(MinTtc, ZeroAtOverlapStep) {
  const SimulationTrace t = one_step_trace(state(0, 0, 0, 10), state(3.0, 0, 0, 0));
  EXPECT_DOUBLE_EQ(min_ttc(t), 0.0);
}

TEST(MinTtc, EqualsBruteForceScan) {
  RngStream rng(31);
  SimulationTrace t = one_step_trace(state(0, 0, 0, 15), state(60, 0, 0, 5));
  for (int k = 1; k < 40; ++k) {
    Snapshot snap;
    snap.time_s = 0.1 * k;
    snap.actors = {state(1.5 * k, 0, 0, 15), state(60 + 0.5 * k, rng.uniform(-1, 1), 0, 5)};
    t.steps.push_back(snap);
  }
  double brute = kInf;
  for (const auto& snap : t.steps) {
    brute = std::min(brute, ttc_at_step(snap.actors[0], snap.actors[1]));
  }
  EXPECT_DOUBLE_EQ(min_ttc(t), std::min(brute, kTtcMax));
}

TEST(Adv, CollisionWithNearMissTtc) {
  SimulationTrace t = one_step_trace(state(0, 0, 0, 10), state(12.5, 0, 0, 0));
  // Bumper gap 8 m closing 10 m/s -> TTC 0.8 on the sweep grid.
  t.collisions.push_back(event(3, 0, 0, 10, 0));
  const RiskReport r = adv(t);
  EXPECT_EQ(r.collision_count, 1);
  EXPECT_NEAR(r.min_ttc_s, 0.8, 1e-9);
  EXPECT_NEAR(r.adv_raw, 99.2, 1e-9);
  EXPECT_NEAR(r.adv_norm, (99.2 + 10.0) / 110.0, 1e-9);
}

TEST(Adv, CollisionFreeNeverClosingIsFloor) {
  const SimulationTrace t = one_step_trace(state(0, 0, 0, 10), state(40, 0, 0, 25));
  const RiskReport r = adv(t);
  EXPECT_EQ(r.collision_count, 0);
  EXPECT_DOUBLE_EQ(r.min_ttc_s, 10.0);
  EXPECT_DOUBLE_EQ(r.adv_raw, -10.0);
  EXPECT_DOUBLE_EQ(r.adv_norm, 0.0);
}

TEST(Adv, CollisionAtContactIsCeiling) {
  SimulationTrace t = one_step_trace(state(0, 0, 0, 10), state(3.0, 0, 0, 0));
  t.collisions.push_back(event(3, 0, 0, 10, 0));
  const RiskReport r = adv(t);
  EXPECT_DOUBLE_EQ(r.min_ttc_s, 0.0);
  EXPECT_DOUBLE_EQ(r.adv_raw, 100.0);
  EXPECT_DOUBLE_EQ(r.adv_norm, 1.0);
}

TEST(Adv, NormalizedScoreAlwaysInUnitInterval) {
  RngStream rng(77);
  for (int trial = 0; trial < 10000; ++trial) {
    SimulationTrace t;
    t.actors.resize(2);
    t.actors[0].role = scengen::ActorRole::ego;
    t.actors[0].id = "ego";
    t.actors[1].id = "npc1";
    const int n_steps = 1 + static_cast<int>(rng.next_below(3));
    for (int k = 0; k < n_steps; ++k) {
      Snapshot snap;
      snap.time_s = 0.1 * k;
      snap.actors = {
          state(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-kPi, kPi),
                rng.uniform(0, 30)),
          state(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-kPi, kPi),
                rng.uniform(0, 30))};
      t.steps.push_back(snap);
    }
    if (rng.uniform() < 0.5) {
      t.collisions.push_back(event(rng.uniform(-3, 3), rng.uniform(-3, 3),
                                   rng.uniform(-kPi, kPi), rng.uniform(0, 30),
                                   rng.uniform(0, 30)));
    }
    const RiskReport r = adv(t);
    ASSERT_GE(r.adv_norm, 0.0);
    ASSERT_LE(r.adv_norm, 1.0);
    ASSERT_EQ(r.collision_types.size(), static_cast<std::size_t>(r.collision_count));
  }
}

TEST(Adv, MonotoneInCollisionCountAndTtc) {
  SimulationTrace base = one_step_trace(state(0, 0, 0, 20), state(50, 0, 0, 10));
  const double norm_clear = adv(base).adv_norm;
  SimulationTrace hit = base;
  hit.collisions.push_back(event(3, 0, 0, 20, 10));
  EXPECT_GE(adv(hit).adv_norm, norm_clear);

  const SimulationTrace closer = one_step_trace(state(0, 0, 0, 20), state(20, 0, 0, 10));
  EXPECT_GE(adv(closer).adv_norm, norm_clear);  // smaller TTC, higher score
}

TEST(Classify, FrontalSlowNpc) {
  const CollisionClass c = classify_collision(event(3, 0, 0, 20, 12));
  EXPECT_EQ(c.category, 1);
  EXPECT_EQ(c.severity, 'L');
}

TEST(Classify, RearFastNpc) {
  const CollisionClass c = classify_collision(event(-3, 0, 0, 12, 20));
  EXPECT_EQ(c.category, 2);
  EXPECT_EQ(c.severity, 'H');
}

TEST(Classify, EqualSpeedsAreMedium) {
  EXPECT_EQ(classify_collision(event(3, 0, 0, 15, 15)).severity, 'M');
}

TEST(Classify, SeverityBoundaries) {
  // dv = npc - ego; thresholds are strict at +-5 m/s.
  EXPECT_EQ(classify_collision(event(3, 0, 0, 20.0, 20.0 - 5.01)).severity, 'L');
  EXPECT_EQ(classify_collision(event(3, 0, 0, 20.0, 15.0)).severity, 'M');
  EXPECT_EQ(classify_collision(event(3, 0, 0, 20.0, 20.0)).severity, 'M');
  EXPECT_EQ(classify_collision(event(3, 0, 0, 20.0, 25.0)).severity, 'M');
  EXPECT_EQ(classify_collision(event(3, 0, 0, 20.0, 20.0 + 5.01)).severity, 'H');
}

TEST(Classify, SideSectors) {
  EXPECT_EQ(classify_collision(event(1, 2, 0, 15, 15)).category, 3);    // left
  EXPECT_EQ(classify_collision(event(1, -2, 0, 15, 15)).category, 4);   // right
  EXPECT_EQ(classify_collision(event(-1, 1, 0, 15, 15)).category, 3);   // rear-left gap
  EXPECT_EQ(classify_collision(event(-1, -1, 0, 15, 15)).category, 4);  // rear-right gap
}

TEST(Classify, CrossingHeadingWinsOverSectors) {
  for (double rel : {kPi / 2.0, -kPi / 2.0, 45.0 * kPi / 180.0, 135.0 * kPi / 180.0}) {
    EXPECT_EQ(classify_collision(event(3, 0, rel, 15, 15)).category, 6) << rel;
  }
}

TEST(Classify, CutoffRequiresLateralMotion) {
  // 10 deg relative heading at 15 m/s gives 2.6 m/s of lateral speed.
  const double rel = 10.0 * kPi / 180.0;
  EXPECT_EQ(classify_collision(event(3, 1, rel, 15, 15)).category, 5);
  // Same geometry at 1 m/s stays below the 0.3 m/s gate -> plain frontal.
  EXPECT_EQ(classify_collision(event(3, 1, rel, 15, 1)).category, 5 - 4);
}

TEST(Classify, TotalOverLabelSet) {
  std::set<std::pair<int, char>> seen;
  for (int bi = -180; bi <= 180; bi += 5) {
    for (int ri = -180; ri <= 180; ri += 15) {
      for (double dv : {-8.0, 0.0, 8.0}) {
        for (double npc_speed : {0.1, 20.0}) {
          const double beta = bi * kPi / 180.0;
          const CollisionEvent ev =
              event(3.0 * std::cos(beta), 3.0 * std::sin(beta), ri * kPi / 180.0,
                    std::max(0.0, npc_speed - dv), npc_speed);
          const CollisionClass c = classify_collision(ev);
          ASSERT_GE(c.category, 1);
          ASSERT_LE(c.category, 6);
          ASSERT_TRUE(c.severity == 'H' || c.severity == 'M' || c.severity == 'L');
          seen.insert({c.category, c.severity});
        }
      }
    }
  }
  EXPECT_LE(seen.size(), 18u);
  std::set<int> categories;
  for (const auto& [cat, sev] : seen) categories.insert(cat);
  EXPECT_EQ(categories.size(), 6u);  // every category reachable
}

TEST(ClassStrings, RoundTrip) {
  for (int cat = 1; cat <= 6; ++cat) {
    for (char sev : {'H', 'M', 'L'}) {
      const CollisionClass c{cat, sev};
      EXPECT_EQ(collision_class_from_string(scengen::to_string(c)), c);
    }
  }
  EXPECT_THROW(collision_class_from_string("C7-H"), ValidationError);
  EXPECT_THROW(collision_class_from_string("C1-X"), ValidationError);
  EXPECT_THROW(collision_class_from_string("garbage"), ValidationError);
}
