#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scengen/scoring.hpp"

namespace scengen {

// One generated concrete scenario with everything needed to audit or replay it.
struct ScenarioRecord {
  std::string ls_id;
  double omega = 0.5;
  std::uint64_t seed = 0;  // concrete-scenario seed
  std::vector<double> values;
  int species = 0;
  bool species_best = false;
  double g = 0.0;
  double adv_raw = 0.0;
  double adv_norm = 0.0;
  double nat_loglik = 0.0;
  double nat_norm = 0.0;
  double min_ttc_s = 0.0;
  std::vector<std::string> collision_types;
  std::string trace_file;
};

std::string record_to_json(const ScenarioRecord& record);
// Parses and re-checks that the stored objective value matches
// objective(adv_norm, nat_norm, omega) within 1e-9.
ScenarioRecord record_from_json(const std::string& text);
void save_record(const std::string& path, const ScenarioRecord& record);
ScenarioRecord load_record(const std::string& path);

// Per-cell scenario table, one row per record.
std::string summary_csv(const std::vector<ScenarioRecord>& records);

// Cell-level run configuration and indicator block written next to the records.
struct RunMetadata {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string ls_id;
  double omega = 0.5;
  IndicatorReport indicators;
};

std::string run_metadata_json(const RunMetadata& meta);

// One row of the cross-scenario score table.
struct ScoreRow {
  std::string scenario_id;
  double omega = 0.0;
  double q = 0.0;
  double k = 0.0;
  double cr = 0.0;
  double act_s = 0.0;
  double acd_m = 0.0;
};

// CSV with header `scenario_id, omega, Q, K, CR, ACT, ACD, total`.
std::string scores_csv(const std::vector<ScoreRow>& rows, double total);

// Stable 64-bit content hash used to fingerprint run configurations.
std::uint64_t fnv1a64(std::string_view text);
std::string config_fingerprint(std::string_view canonical_config);

}  // namespace scengen
