#include "scengen/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scengen/errors.hpp"
#include "scengen/format.hpp"
#include "scengen/search.hpp"

namespace scengen {

namespace {

std::string infinity_aware(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

}  // namespace

std::string record_to_json(const ScenarioRecord& record) {
  nlohmann::ordered_json j;
  j["ls_id"] = record.ls_id;
  j["omega"] = record.omega;
  j["seed"] = record.seed;
  j["values"] = record.values;
  j["species"] = record.species;
  j["species_best"] = record.species_best;
  j["g"] = record.g;
  j["adv_raw"] = record.adv_raw;
  j["adv_norm"] = record.adv_norm;
  j["nat_loglik"] = record.nat_loglik;
  j["nat_norm"] = record.nat_norm;
  j["min_ttc_s"] = record.min_ttc_s;
  j["collision_types"] = record.collision_types;
  j["trace"] = record.trace_file;
  return j.dump(2) + "\n";
}

ScenarioRecord record_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid scenario record JSON: ") + e.what());
  }
  ScenarioRecord record;
  try {
    record.ls_id = j.at("ls_id").get<std::string>();
    record.omega = j.at("omega").get<double>();
    record.seed = j.at("seed").get<std::uint64_t>();
    record.values = j.at("values").get<std::vector<double>>();
    record.species = j.at("species").get<int>();
    record.species_best = j.at("species_best").get<bool>();
    record.g = j.at("g").get<double>();
    record.adv_raw = j.at("adv_raw").get<double>();
    record.adv_norm = j.at("adv_norm").get<double>();
    record.nat_loglik = j.at("nat_loglik").get<double>();
    record.nat_norm = j.at("nat_norm").get<double>();
    record.min_ttc_s = j.at("min_ttc_s").get<double>();
    record.collision_types = j.at("collision_types").get<std::vector<std::string>>();
    record.trace_file = j.at("trace").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid scenario record JSON: ") + e.what());
  }
  const double expected = objective_value(record.adv_norm, record.nat_norm, record.omega);
  if (!(std::abs(expected - record.g) <= 1e-9)) {
    throw ValidationError("scenario record is inconsistent: stored objective " +
                          format_double(record.g) + " differs from recomputed " +
                          format_double(expected));
  }
  return record;
}

void save_record(const std::string& path, const ScenarioRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write scenario record '" + path + "'");
  out << record_to_json(record);
}

ScenarioRecord load_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario record '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return record_from_json(buf.str());
}

std::string summary_csv(const std::vector<ScenarioRecord>& records) {
  std::ostringstream out;
  out << "scenario_id,species,species_best,g,adv_raw,adv_norm,nat_loglik,nat_norm,"
         "min_ttc_s,collided,collision_types,trace\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ScenarioRecord& r = records[i];
    out << "scenario_" << i + 1 << ',' << r.species << ',' << (r.species_best ? 1 : 0) << ','
        << format_double(r.g) << ',' << format_double(r.adv_raw) << ','
        << format_double(r.adv_norm) << ',' << format_double(r.nat_loglik) << ','
        << format_double(r.nat_norm) << ',' << format_double(r.min_ttc_s) << ','
        << (r.collision_types.empty() ? 0 : 1) << ',';
    for (std::size_t k = 0; k < r.collision_types.size(); ++k) {
      if (k) out << ';';
      out << r.collision_types[k];
    }
    out << ',' << r.trace_file << '\n';
  }
  return out.str();
}

std::string run_metadata_json(const RunMetadata& meta) {
  nlohmann::ordered_json j;
  j["config_hash"] = meta.config_hash;
  j["seed"] = meta.seed;
  j["tool_version"] = meta.tool_version;
  j["ls_id"] = meta.ls_id;
  j["omega"] = meta.omega;
  j["scenarios"] = meta.indicators.scenario_count;
  j["collided"] = meta.indicators.collided_count;
  j["cr"] = meta.indicators.cr;
  if (std::isinf(meta.indicators.act_s)) {
    j["act_s"] = infinity_aware(meta.indicators.act_s);
    j["acd_m"] = infinity_aware(meta.indicators.acd_m);
  } else {
    j["act_s"] = meta.indicators.act_s;
    j["acd_m"] = meta.indicators.acd_m;
  }
  j["total_time_s"] = meta.indicators.total_time_s;
  j["total_distance_m"] = meta.indicators.total_distance_m;
  return j.dump(2) + "\n";
}

std::string scores_csv(const std::vector<ScoreRow>& rows, double total) {
  std::ostringstream out;
  out << "scenario_id,omega,Q,K,CR,ACT,ACD,total\n";
  for (const ScoreRow& r : rows) {
    out << r.scenario_id << ',' << format_double(r.omega) << ',' << format_double(r.q) << ','
        << format_double(r.k) << ',' << format_double(r.cr) << ',' << infinity_aware(r.act_s)
        << ',' << infinity_aware(r.acd_m) << ',' << format_double(total) << '\n';
  }
  return out.str();
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string config_fingerprint(std::string_view canonical_config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config)));
  return std::string(buf);
}

}  // namespace scengen
