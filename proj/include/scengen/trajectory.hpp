#ifndef SCENGEN_TRAJECTORY_HPP
#define SCENGEN_TRAJECTORY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "scengen/scenario.hpp"

namespace scengen {

// One observed vehicle sample. x is the longitudinal coordinate (direction
// of travel on highways), y the lateral one. front_id/rear_id are the
// neighbors in the same lane; 0 means none.
struct TrajectoryPoint {
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
  int lane = 0;
  long long front_id = 0;
  long long rear_id = 0;
  double time = 0.0;
  long long vehicle_id = 0;
};

// One detected traffic event, projected onto a scenario's parameter box.
struct EventSample {
  std::vector<double> features;  // LS parameter order
  double t_start = 0.0;          // source window in recording time
  double t_end = 0.0;
};

// Column mapping for trajectory CSVs. The default matches the public
// NGSIM export (feet units at 10 Hz, Local_Y pointing along the road).
struct CsvSchema {
  std::string vehicle_id = "Vehicle_ID";
  std::string frame_id = "Frame_ID";
  std::string local_x = "Local_X";  // lateral -> y
  std::string local_y = "Local_Y";  // longitudinal -> x
  std::string speed = "v_Vel";
  std::string lane = "Lane_ID";
  std::string preceding = "Preceding";
  std::string following = "Following";
  double frame_rate_hz = 10.0;
  bool convert_feet = true;

  static CsvSchema ngsim() { return {}; }
};

struct IngestResult {
  std::vector<TrajectoryPoint> points;
  int skipped_rows = 0;
};

// Parses a trajectory CSV. Rows with unparsable numerics are skipped and
// counted; a missing mandatory column or an empty file raises ParseError.
IngestResult ingest_csv(const std::string& path, const CsvSchema& schema = CsvSchema::ngsim());
IngestResult parse_trajectory_csv(const std::string& text, const CsvSchema& schema);

// Finds the scenario's event pattern in recorded traffic and measures one
// feature vector per event (LS parameter order). Events with any feature
// outside the box are dropped.
std::vector<EventSample> extract_events(const std::vector<TrajectoryPoint>& points,
                                        const LogicalScenario& ls);

// Built-in traffic generator: n_events small scenes (disjoint time ranges,
// unique vehicle ids) whose behavior matches the scenario's event pattern,
// sampled around benign parameter clusters. Deterministic per seed.
std::vector<TrajectoryPoint> synthetic_traffic(const LogicalScenario& ls, int n_events,
                                               std::uint64_t seed);

}  // namespace scengen

#endif  // SCENGEN_TRAJECTORY_HPP
