#include "scengen/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "scengen/errors.hpp"
#include "scengen/format.hpp"

namespace scengen {

const char* to_string(MapTemplate m) {
  switch (m) {
    case MapTemplate::highway2: return "highway2";
    case MapTemplate::highway3: return "highway3";
    case MapTemplate::junction4way: return "junction4way";
  }
  return "?";
}

const char* to_string(ActorRole r) {
  return r == ActorRole::ego ? "ego" : "npc";
}

const char* to_string(BehaviorKind b) {
  return b == BehaviorKind::idm_ego ? "idm_ego" : "scripted_npc";
}

MapTemplate map_template_from_string(const std::string& s) {
  if (s == "highway2") return MapTemplate::highway2;
  if (s == "highway3") return MapTemplate::highway3;
  if (s == "junction4way") return MapTemplate::junction4way;
  throw ValidationError("unknown map_template '" + s + "'");
}

ActorRole actor_role_from_string(const std::string& s) {
  if (s == "ego") return ActorRole::ego;
  if (s == "npc") return ActorRole::npc;
  throw ValidationError("unknown actor role '" + s + "'");
}

BehaviorKind behavior_from_string(const std::string& s) {
  if (s == "idm_ego") return BehaviorKind::idm_ego;
  if (s == "scripted_npc") return BehaviorKind::scripted_npc;
  throw ValidationError("unknown behavior '" + s + "'");
}

int LogicalScenario::step_count() const {
  double n = horizon_s / dt_s;
  int k = static_cast<int>(std::lround(n));
  if (k <= 0 || std::abs(n - k) > 1e-9) {
    throw ValidationError("horizon_s must be a positive multiple of dt_s");
  }
  return k;
}

int LogicalScenario::param_index(const std::string& name) const {
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    if (parameters[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const ActorTemplate& LogicalScenario::ego_actor() const {
  for (const auto& a : actors) {
    if (a.role == ActorRole::ego) return a;
  }
  throw ValidationError("scenario '" + id + "' has no ego actor");
}

int LogicalScenario::npc_count() const {
  int n = 0;
  for (const auto& a : actors) {
    if (a.role == ActorRole::npc) ++n;
  }
  return n;
}

void LogicalScenario::validate() const {
  if (id.empty()) throw ValidationError("scenario id must not be empty");
  if (parameters.empty()) {
    throw ValidationError("scenario '" + id + "' has an empty parameter list");
  }
  std::set<std::string> names;
  for (const auto& p : parameters) {
    if (p.name.empty()) {
      throw ValidationError("scenario '" + id + "' has an unnamed parameter");
    }
    if (!names.insert(p.name).second) {
      throw ValidationError("duplicate parameter '" + p.name + "' in scenario '" + id + "'");
    }
    if (!(p.lower <= p.upper)) {
      throw ValidationError("parameter '" + p.name + "' has lower > upper (" +
                            std::to_string(p.lower) + " > " + std::to_string(p.upper) + ")");
    }
  }
  int egos = 0;
  std::set<std::string> actor_ids;
  for (const auto& a : actors) {
    if (a.id.empty()) throw ValidationError("scenario '" + id + "' has an unnamed actor");
    if (!actor_ids.insert(a.id).second) {
      throw ValidationError("duplicate actor '" + a.id + "' in scenario '" + id + "'");
    }
    if (a.role == ActorRole::ego) ++egos;
    if (a.length_m <= 0.0 || a.width_m <= 0.0) {
      throw ValidationError("actor '" + a.id + "' has a non-positive footprint");
    }
  }
  if (egos != 1) {
    throw ValidationError("scenario '" + id + "' must have exactly one ego actor, found " +
                          std::to_string(egos));
  }
  if (dt_s <= 0.0 || horizon_s <= 0.0) {
    throw ValidationError("scenario '" + id + "' needs positive horizon_s and dt_s");
  }
  step_count();  // integral-horizon check
}

namespace {

ParameterSpec param(std::string name, double lo, double hi, std::string unit,
                    std::string description) {
  return ParameterSpec{std::move(name), lo, hi, std::move(unit), std::move(description)};
}

ActorTemplate actor(std::string id, ActorRole role, std::string route, BehaviorKind behavior) {
  return ActorTemplate{std::move(id), role, std::move(route), behavior, 4.5, 2.0};
}

LogicalScenario make_fb() {
  LogicalScenario ls;
  ls.id = "FB";
  ls.description = "Lead vehicle in the ego lane brakes hard after a trigger delay.";
  ls.map_template = MapTemplate::highway2;
  ls.parameters = {
      param("ego_init_speed", 10.0, 30.0, "m/s", "initial ego speed"),
      param("npc_init_gap", 10.0, 60.0, "m", "initial bumper-to-bumper gap to the lead vehicle"),
      param("npc_init_speed", 10.0, 30.0, "m/s", "initial lead-vehicle speed"),
      param("brake_trigger_time", 1.0, 8.0, "s", "time at which the lead vehicle starts braking"),
      param("brake_decel", 2.0, 9.0, "m/s^2", "lead-vehicle deceleration magnitude"),
  };
  ls.actors = {
      actor("ego", ActorRole::ego, "lane0", BehaviorKind::idm_ego),
      actor("npc1", ActorRole::npc, "lane0", BehaviorKind::scripted_npc),
  };
  return ls;
}

LogicalScenario make_cutin1() {
  LogicalScenario ls;
  ls.id = "CutIn1";
  ls.description = "Vehicle from the adjacent lane cuts into the ego lane.";
  ls.map_template = MapTemplate::highway2;
  ls.parameters = {
      param("ego_init_speed", 10.0, 30.0, "m/s", "initial ego speed"),
      param("npc_init_long_offset", -20.0, 40.0, "m",
            "initial longitudinal center offset of the cutting vehicle relative to the ego"),
      param("npc_init_speed", 5.0, 30.0, "m/s", "initial cutting-vehicle speed"),
      param("cutin_trigger_gap", 5.0, 40.0, "m",
            "longitudinal center offset at which the lane change starts"),
      param("cutin_duration", 1.0, 5.0, "s", "duration of the lane change"),
      param("npc_target_speed", 5.0, 30.0, "m/s", "cutting-vehicle speed after the lane change"),
  };
  ls.actors = {
      actor("ego", ActorRole::ego, "lane0", BehaviorKind::idm_ego),
      actor("npc1", ActorRole::npc, "lane1", BehaviorKind::scripted_npc),
  };
  return ls;
}

LogicalScenario make_cutin2() {
  LogicalScenario ls = make_cutin1();
  ls.id = "CutIn2";
  ls.description =
      "Vehicle cuts into the ego lane while a second vehicle occupies the left rear.";
  ls.parameters.push_back(param("npc2_init_long_offset", -40.0, 0.0, "m",
                                "initial longitudinal center offset of the rear vehicle"));
  ls.parameters.push_back(param("npc2_speed", 10.0, 30.0, "m/s", "rear-vehicle speed"));
  ls.actors.push_back(actor("npc2", ActorRole::npc, "lane1", BehaviorKind::scripted_npc));
  return ls;
}

LogicalScenario make_junction(std::string id, std::string description, std::string ego_route,
                              std::string npc_route) {
  LogicalScenario ls;
  ls.id = std::move(id);
  ls.description = std::move(description);
  ls.map_template = MapTemplate::junction4way;
  ls.parameters = {
      param("ego_init_speed", 5.0, 15.0, "m/s", "initial ego speed"),
      param("ego_init_dist_to_conflict", 20.0, 60.0, "m",
            "initial ego path distance to the conflict point"),
      param("npc_init_dist_to_conflict", 20.0, 60.0, "m",
            "initial crossing-vehicle path distance to the conflict point"),
      param("npc_speed", 5.0, 20.0, "m/s", "crossing-vehicle speed"),
  };
  ls.actors = {
      actor("ego", ActorRole::ego, std::move(ego_route), BehaviorKind::idm_ego),
      actor("npc1", ActorRole::npc, std::move(npc_route), BehaviorKind::scripted_npc),
  };
  return ls;
}

}  // namespace

std::vector<LogicalScenario> builtin_catalog() {
  std::vector<LogicalScenario> catalog;
  catalog.push_back(make_fb());
  catalog.push_back(make_cutin1());
  catalog.push_back(make_cutin2());
  catalog.push_back(make_junction(
      "OVTP", "Ego drives straight through a junction while a vehicle crosses from the left.",
      "south_north", "west_east"));
  catalog.push_back(make_junction(
      "NJLT", "Ego turns left at a junction across oncoming straight traffic.",
      "south_west_left", "north_south"));
  catalog.push_back(make_junction(
      "NJRT", "Ego turns right at a junction while a vehicle crosses from the left.",
      "south_east_right", "west_east"));
  for (const auto& ls : catalog) ls.validate();
  return catalog;
}

LogicalScenario catalog_entry(const std::string& id) {
  for (auto& ls : builtin_catalog()) {
    if (ls.id == id) return ls;
  }
  throw ValidationError("unknown scenario '" + id +
                        "' (expected one of FB, CutIn1, CutIn2, OVTP, NJLT, NJRT)");
}

namespace {

// ---- config format -------------------------------------------------------
//
// Small key/value grammar (TOML-like): `key = value` lines plus repeated
// `[[parameter]]` and `[[actor]]` section headers. Strings are quoted,
// numbers are bare, `#` starts a comment. Parsed by hand so errors carry
// 1-based line numbers.

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ConfigValue {
  bool is_string = false;
  std::string str;
  double num = 0.0;
};

ConfigValue parse_value(const std::string& raw, int line) {
  std::string v = trim(raw);
  if (v.empty()) throw ParseError("missing value after '='", line);
  ConfigValue out;
  if (v.front() == '"') {
    out.is_string = true;
    std::string s;
    std::size_t i = 1;
    for (; i < v.size(); ++i) {
      char c = v[i];
      if (c == '\\') {
        if (i + 1 >= v.size()) throw ParseError("dangling escape in string", line);
        char n = v[++i];
        if (n == '"' || n == '\\') {
          s += n;
        } else {
          throw ParseError(std::string("unsupported escape '\\") + n + "'", line);
        }
      } else if (c == '"') {
        break;
      } else {
        s += c;
      }
    }
    if (i >= v.size()) throw ParseError("unterminated string", line);
    std::string rest = trim(v.substr(i + 1));
    if (!rest.empty() && rest.front() != '#') {
      throw ParseError("unexpected text after string value", line);
    }
    out.str = std::move(s);
    return out;
  }
  std::size_t hash = v.find('#');
  if (hash != std::string::npos) v = trim(v.substr(0, hash));
  char* end = nullptr;
  out.num = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ParseError("expected a number or quoted string, got '" + v + "'", line);
  }
  return out;
}

std::string expect_string(const ConfigValue& v, const std::string& key, int line) {
  if (!v.is_string) throw ParseError("'" + key + "' must be a quoted string", line);
  return v.str;
}

double expect_number(const ConfigValue& v, const std::string& key, int line) {
  if (v.is_string) throw ParseError("'" + key + "' must be a number", line);
  return v.num;
}

void quote_into(std::ostringstream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    if (c == '"' || c == '\\') os << '\\';
    os << c;
  }
  os << '"';
}

}  // namespace

LogicalScenario parse_scenario_config(const std::string& text) {
  LogicalScenario ls;
  ls.horizon_s = 0.0;
  ls.dt_s = 0.0;
  enum class Section { top, parameter, actor };
  Section section = Section::top;
  bool saw_map = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool saw_anything = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    saw_anything = true;
    if (s.front() == '[') {
      if (s == "[[parameter]]") {
        section = Section::parameter;
        ls.parameters.emplace_back();
      } else if (s == "[[actor]]") {
        section = Section::actor;
        ls.actors.emplace_back();
      } else {
        throw ParseError("unknown section '" + s + "' (expected [[parameter]] or [[actor]])", line);
      }
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value', got '" + s + "'", line);
    }
    std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ParseError("missing key before '='", line);
    ConfigValue value = parse_value(s.substr(eq + 1), line);

    try {
      switch (section) {
        case Section::top:
          if (key == "id") {
            ls.id = expect_string(value, key, line);
          } else if (key == "description") {
            ls.description = expect_string(value, key, line);
          } else if (key == "map_template") {
            ls.map_template = map_template_from_string(expect_string(value, key, line));
            saw_map = true;
          } else if (key == "horizon_s") {
            ls.horizon_s = expect_number(value, key, line);
          } else if (key == "dt_s") {
            ls.dt_s = expect_number(value, key, line);
          } else {
            throw ParseError("unknown top-level key '" + key + "'", line);
          }
          break;
        case Section::parameter: {
          ParameterSpec& p = ls.parameters.back();
          if (key == "name") {
            p.name = expect_string(value, key, line);
          } else if (key == "lower") {
            p.lower = expect_number(value, key, line);
          } else if (key == "upper") {
            p.upper = expect_number(value, key, line);
          } else if (key == "unit") {
            p.unit = expect_string(value, key, line);
          } else if (key == "description") {
            p.description = expect_string(value, key, line);
          } else {
            throw ParseError("unknown [[parameter]] key '" + key + "'", line);
          }
          break;
        }
        case Section::actor: {
          ActorTemplate& a = ls.actors.back();
          if (key == "id") {
            a.id = expect_string(value, key, line);
          } else if (key == "role") {
            a.role = actor_role_from_string(expect_string(value, key, line));
          } else if (key == "route") {
            a.route = expect_string(value, key, line);
          } else if (key == "behavior") {
            a.behavior = behavior_from_string(expect_string(value, key, line));
          } else if (key == "length_m") {
            a.length_m = expect_number(value, key, line);
          } else if (key == "width_m") {
            a.width_m = expect_number(value, key, line);
          } else {
            throw ParseError("unknown [[actor]] key '" + key + "'", line);
          }
          break;
        }
      }
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line);
    }
  }
  if (!saw_anything) throw ParseError("empty scenario config", 1);
  if (ls.id.empty()) throw ValidationError("scenario config is missing 'id'");
  if (!saw_map) throw ValidationError("scenario config is missing 'map_template'");
  if (ls.horizon_s == 0.0) throw ValidationError("scenario config is missing 'horizon_s'");
  if (ls.dt_s == 0.0) throw ValidationError("scenario config is missing 'dt_s'");
  ls.validate();
  return ls;
}

LogicalScenario load_scenario_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str());
}

std::string serialize_scenario_config(const LogicalScenario& ls) {
  std::ostringstream os;
  os << "id = ";
  quote_into(os, ls.id);
  os << "\ndescription = ";
  quote_into(os, ls.description);
  os << "\nmap_template = ";
  quote_into(os, to_string(ls.map_template));
  os << "\nhorizon_s = " << format_double(ls.horizon_s);
  os << "\ndt_s = " << format_double(ls.dt_s) << "\n";
  for (const auto& p : ls.parameters) {
    os << "\n[[parameter]]\nname = ";
    quote_into(os, p.name);
    os << "\nlower = " << format_double(p.lower);
    os << "\nupper = " << format_double(p.upper);
    os << "\nunit = ";
    quote_into(os, p.unit);
    os << "\ndescription = ";
    quote_into(os, p.description);
    os << "\n";
  }
  for (const auto& a : ls.actors) {
    os << "\n[[actor]]\nid = ";
    quote_into(os, a.id);
    os << "\nrole = ";
    quote_into(os, to_string(a.role));
    os << "\nroute = ";
    quote_into(os, a.route);
    os << "\nbehavior = ";
    quote_into(os, to_string(a.behavior));
    os << "\nlength_m = " << format_double(a.length_m);
    os << "\nwidth_m = " << format_double(a.width_m);
    os << "\n";
  }
  return os.str();
}

ConcreteScenario clamp_to_box(const LogicalScenario& ls, std::span<const double> values,
                              std::uint64_t seed) {
  if (static_cast<int>(values.size()) != ls.dim()) {
    throw ValidationError("expected " + std::to_string(ls.dim()) + " values for scenario '" +
                          ls.id + "', got " + std::to_string(values.size()));
  }
  ConcreteScenario cs;
  cs.ls_id = ls.id;
  cs.seed = seed;
  cs.values.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    cs.values[i] = std::clamp(values[i], ls.parameters[i].lower, ls.parameters[i].upper);
  }
  return cs;
}

}  // namespace scengen
