#include "scengen/trajectory.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "scengen/errors.hpp"
#include "scengen/scenario.hpp"

using scengen::catalog_entry;
using scengen::CsvSchema;
using scengen::EventSample;
using scengen::extract_events;
using scengen::IngestResult;
using scengen::ingest_csv;
using scengen::LogicalScenario;
using scengen::ParseError;
using scengen::parse_trajectory_csv;
using scengen::synthetic_traffic;
using scengen::TrajectoryPoint;

namespace {

const char* kHeader = "Vehicle_ID,Frame_ID,Local_X,Local_Y,v_Vel,Lane_ID,Preceding,Following\n";

TrajectoryPoint point(long long vid, double t, double x, double y, double speed, int lane,
                      long long front = 0, long long rear = 0) {
  TrajectoryPoint p;
  p.vehicle_id = vid;
  p.time = t;
  p.x = x;
  p.y = y;
  p.speed = speed;
  p.lane = lane;
  p.front_id = front;
  p.rear_id = rear;
  return p;
}

double lane_y(int lane) { return 1.75 + 3.5 * lane; }

// Leader 10 brakes at 4 m/s^2 from t = 3 s; follower 11 trails 50 m behind.
std::vector<TrajectoryPoint> braking_scene() {
  std::vector<TrajectoryPoint> pts;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    const double lead_speed = t < 3.0 ? 20.0 : std::max(0.0, 20.0 - 4.0 * (t - 3.0));
    double lead_x = 50.0;
    if (t <= 3.0) {
      lead_x += 20.0 * t;
    } else {
      const double tb = std::min(t - 3.0, 5.0);
      lead_x += 60.0 + 20.0 * tb - 2.0 * tb * tb;
      if (t - 3.0 > 5.0) lead_x += 0.0;  // stopped
    }
    pts.push_back(point(10, t, lead_x, lane_y(0), lead_speed, 0, 0, 11));
    pts.push_back(point(11, t, 20.0 * t, lane_y(0), 20.0, 0, 10, 0));
  }
  return pts;
}

// Mover 1 drifts from lane 3 to lane 2 between t = 4 and t = 6 while
// vehicle 2 holds lane 2 some 30 m behind.
std::vector<TrajectoryPoint> lane_change_scene() {
  std::vector<TrajectoryPoint> pts;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    double y = lane_y(3);
    if (t > 4.0 && t < 6.0) y = lane_y(3) - 1.75 * (t - 4.0);
    if (t >= 6.0) y = lane_y(2);
    const int lane = y >= lane_y(2) + 1.75 ? 3 : 2;
    pts.push_back(point(1, t, 20.0 + 20.0 * t, y, 20.0, lane));
    pts.push_back(point(2, t, 18.0 * t, lane_y(2), 18.0, 2));
  }
  return pts;
}

}  // namespace

TEST(CsvParse, WellFormedRows) {
  const std::string text = std::string(kHeader) +
                           "7,10,12.0,100.0,65.6,3,0,0\n"
                           "7,11,12.0,106.5,65.6,3,0,0\n"
                           "7,12,12.0,113.0,65.6,3,0,0\n";
  const IngestResult r = parse_trajectory_csv(text, CsvSchema::ngsim());
  ASSERT_EQ(r.points.size(), 3u);
  EXPECT_EQ(r.skipped_rows, 0);
  EXPECT_EQ(r.points[0].vehicle_id, 7);
  EXPECT_NEAR(r.points[0].x, 100.0 * 0.3048, 1e-9);  // Local_Y is longitudinal
  EXPECT_NEAR(r.points[0].y, 12.0 * 0.3048, 1e-9);
  EXPECT_NEAR(r.points[0].speed, 65.6 * 0.3048, 1e-9);
  EXPECT_NEAR(r.points[0].time, 1.0, 1e-12);  // frame 10 at 10 Hz
  EXPECT_EQ(r.points[0].lane, 3);
}

TEST(CsvParse, CorruptNumericRowSkippedAndCounted) {
  const std::string text = std::string(kHeader) +
                           "7,10,12.0,100.0,65.6,3,0,0\n"
                           "7,11,12.0,106.5,not_a_number,3,0,0\n"
                           "7,12,12.0,113.0,65.6,3,0,0\n";
  const IngestResult r = parse_trajectory_csv(text, CsvSchema::ngsim());
  EXPECT_EQ(r.points.size(), 2u);
  EXPECT_EQ(r.skipped_rows, 1);
}

TEST(CsvParse, ShortRowSkipped) {
  const std::string text = std::string(kHeader) + "7,10,12.0\n";
  const IngestResult r = parse_trajectory_csv(text, CsvSchema::ngsim());
  EXPECT_EQ(r.points.size(), 0u);
  EXPECT_EQ(r.skipped_rows, 1);
}

TEST(CsvParse, MissingMandatoryColumnThrows) {
  const std::string text = "Vehicle_ID,Frame_ID,Local_X,Local_Y,v_Vel,Lane_ID,Preceding\n"
                           "7,10,12.0,100.0,65.6,3,0\n";
  try {
    parse_trajectory_csv(text, CsvSchema::ngsim());
    FAIL() << "missing column accepted";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("Following"), std::string::npos);
  }
}

TEST(CsvParse, EmptyInputThrows) {
  EXPECT_THROW(parse_trajectory_csv("", CsvSchema::ngsim()), ParseError);
  EXPECT_THROW(parse_trajectory_csv("\n\n", CsvSchema::ngsim()), ParseError);
  EXPECT_THROW(parse_trajectory_csv(std::string(kHeader), CsvSchema::ngsim()), ParseError);
}

TEST(CsvParse, MetricSchemaSkipsConversion) {
  CsvSchema schema = CsvSchema::ngsim();
  schema.convert_feet = false;
  schema.frame_rate_hz = 25.0;
  const std::string text = std::string(kHeader) + "1,50,3.5,200.0,22.0,1,0,0\n";
  const IngestResult r = parse_trajectory_csv(text, schema);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_DOUBLE_EQ(r.points[0].x, 200.0);
  EXPECT_DOUBLE_EQ(r.points[0].speed, 22.0);
  EXPECT_DOUBLE_EQ(r.points[0].time, 2.0);
}

TEST(CsvParse, ColumnOrderFreeform) {
  // Same data with shuffled columns must parse identically.
  const std::string text =
      "Local_Y,Vehicle_ID,Following,Frame_ID,Lane_ID,v_Vel,Preceding,Local_X\n"
      "100.0,7,0,10,3,65.6,0,12.0\n";
  const IngestResult r = parse_trajectory_csv(text, CsvSchema::ngsim());
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_EQ(r.points[0].vehicle_id, 7);
  EXPECT_NEAR(r.points[0].x, 30.48, 1e-9);
}

TEST(IngestFile, MissingFileThrows) {
  EXPECT_THROW(ingest_csv("/nonexistent/path/to.csv"), ParseError);
}

TEST(IngestFile, RoundTripThroughDisk) {
  const std::string path = testing::TempDir() + "scengen_ingest_test.csv";
  {
    std::ofstream out(path);
    out << kHeader << "7,10,12.0,100.0,65.6,3,0,0\n";
  }
  const IngestResult r = ingest_csv(path);
  EXPECT_EQ(r.points.size(), 1u);
  std::remove(path.c_str());
}

TEST(ExtractBrake, SustainedDecelWithFollowerYieldsOneEvent) {
  const LogicalScenario fb = catalog_entry("FB");
  const auto events = extract_events(braking_scene(), fb);
  ASSERT_EQ(events.size(), 1u);
  const EventSample& ev = events[0];
  ASSERT_EQ(ev.features.size(), 5u);
  EXPECT_NEAR(ev.features[0], 20.0, 1e-6);   // follower speed
  EXPECT_NEAR(ev.features[1], 45.5, 1e-6);   // bumper gap 50 - 4.5
  EXPECT_NEAR(ev.features[2], 20.0, 1e-6);   // leader speed
  EXPECT_NEAR(ev.features[3], 3.0, 0.2);     // brake onset after pairing
  EXPECT_NEAR(ev.features[4], 4.0, 0.1);     // mean decel
  EXPECT_LT(ev.t_start, ev.t_end);
}

TEST(ExtractBrake, GentleTrafficYieldsNothing) {
  std::vector<TrajectoryPoint> pts;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    pts.push_back(point(10, t, 50.0 + 20.0 * t, lane_y(0), 20.0, 0, 0, 11));
    pts.push_back(point(11, t, 20.0 * t, lane_y(0), 20.0, 0, 10, 0));
  }
  EXPECT_TRUE(extract_events(pts, catalog_entry("FB")).empty());
}

TEST(ExtractCutIn, LaneChangeInFrontOfRearVehicle) {
  const LogicalScenario ls = catalog_entry("CutIn1");
  const auto events = extract_events(lane_change_scene(), ls);
  ASSERT_EQ(events.size(), 1u);
  const EventSample& ev = events[0];
  ASSERT_EQ(ev.features.size(), 6u);
  EXPECT_NEAR(ev.features[0], 18.0, 1e-6);  // observer speed at window start
  EXPECT_NEAR(ev.features[1], 20.0, 1e-6);  // mover offset at window start
  EXPECT_NEAR(ev.features[2], 20.0, 1e-6);  // mover speed
  EXPECT_NEAR(ev.features[3], 28.4, 0.5);   // gap when the drift starts
  EXPECT_GT(ev.features[4], 1.0);           // measured maneuver duration
  EXPECT_LT(ev.features[4], 3.0);
  EXPECT_NEAR(ev.features[5], 20.0, 1e-6);  // mover speed once settled
}

TEST(ExtractCutIn, NoLaneChangeNoEvents) {
  std::vector<TrajectoryPoint> pts;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    pts.push_back(point(1, t, 20.0 * t, lane_y(1), 20.0, 1));
    pts.push_back(point(2, t, 30.0 + 20.0 * t, lane_y(0), 20.0, 0));
  }
  EXPECT_TRUE(extract_events(pts, catalog_entry("CutIn1")).empty());
}

TEST(ExtractCutIn, LaneChangeWithoutRearVehicleIgnored) {
  std::vector<TrajectoryPoint> pts;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    double y = lane_y(3);
    if (t > 4.0 && t < 6.0) y = lane_y(3) - 1.75 * (t - 4.0);
    if (t >= 6.0) y = lane_y(2);
    const int lane = y >= lane_y(2) + 1.75 ? 3 : 2;
    pts.push_back(point(1, t, 20.0 + 20.0 * t, y, 20.0, lane));
  }
  EXPECT_TRUE(extract_events(pts, catalog_entry("CutIn1")).empty());
}

TEST(Synthetic, EventsLandInsideTheBox) {
  // The generator aims inside the parameter box; at worst one in ten events
  // may spill over a boundary or fail detection.
  const LogicalScenario ls = catalog_entry("CutIn1");
  const auto points = synthetic_traffic(ls, 5000, 123);
  const auto events = extract_events(points, ls);
  EXPECT_GE(events.size(), 4500u);
  for (const auto& ev : events) {
    ASSERT_EQ(ev.features.size(), 6u);
    for (std::size_t i = 0; i < ev.features.size(); ++i) {
      ASSERT_GE(ev.features[i], ls.parameters[i].lower) << "dim " << i;
      ASSERT_LE(ev.features[i], ls.parameters[i].upper) << "dim " << i;
    }
  }
}

TEST(Synthetic, BrakeScenesExtractInBox) {
  const LogicalScenario ls = catalog_entry("FB");
  const auto events = extract_events(synthetic_traffic(ls, 1000, 5), ls);
  EXPECT_GE(events.size(), 900u);
}

TEST(Synthetic, CrossingScenesExtractInBox) {
  const LogicalScenario ls = catalog_entry("NJLT");
  const auto events = extract_events(synthetic_traffic(ls, 1000, 5), ls);
  EXPECT_GE(events.size(), 900u);
}

TEST(Synthetic, DeterministicPerSeed) {
  const LogicalScenario ls = catalog_entry("FB");
  const auto a = synthetic_traffic(ls, 50, 9);
  const auto b = synthetic_traffic(ls, 50, 9);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].vehicle_id, b[i].vehicle_id);
    ASSERT_EQ(a[i].time, b[i].time);
    ASSERT_EQ(a[i].x, b[i].x);
    ASSERT_EQ(a[i].speed, b[i].speed);
  }
  const auto c = synthetic_traffic(ls, 50, 10);
  bool differs = c.size() != a.size();
  for (std::size_t i = 0; !differs && i < a.size(); ++i) {
    differs = a[i].x != c[i].x;
  }
  EXPECT_TRUE(differs);
}

TEST(Synthetic, ScenesUseDisjointVehicleIdsAndTimes) {
  const LogicalScenario ls = catalog_entry("CutIn2");
  const auto points = synthetic_traffic(ls, 20, 3);
  // Group points per vehicle; a vehicle must belong to exactly one scene, so
  // its time span must not interleave with another vehicle reusing its id.
  std::vector<long long> ids;
  for (const auto& p : points) ids.push_back(p.vehicle_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  EXPECT_GE(ids.size(), 40u);  // at least two actors per scene
}
