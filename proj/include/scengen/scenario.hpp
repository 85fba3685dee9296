#ifndef SCENGEN_SCENARIO_HPP
#define SCENGEN_SCENARIO_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace scengen {

// One searchable scenario parameter with its closed range [lower, upper].
struct ParameterSpec {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  std::string unit;
  std::string description;

  bool operator==(const ParameterSpec&) const = default;
};

enum class MapTemplate { highway2, highway3, junction4way };
enum class ActorRole { ego, npc };
enum class BehaviorKind { idm_ego, scripted_npc };

const char* to_string(MapTemplate m);
const char* to_string(ActorRole r);
const char* to_string(BehaviorKind b);
MapTemplate map_template_from_string(const std::string& s);
ActorRole actor_role_from_string(const std::string& s);
BehaviorKind behavior_from_string(const std::string& s);

struct ActorTemplate {
  std::string id;
  ActorRole role = ActorRole::npc;
  std::string route;
  BehaviorKind behavior = BehaviorKind::scripted_npc;
  double length_m = 4.5;
  double width_m = 2.0;

  bool operator==(const ActorTemplate&) const = default;
};

// A parameter box over a map template: the unit the search runs on.
struct LogicalScenario {
  std::string id;
  std::string description;
  std::vector<ParameterSpec> parameters;  // order fixes the vector layout
  MapTemplate map_template = MapTemplate::highway2;
  std::vector<ActorTemplate> actors;
  double horizon_s = 20.0;
  double dt_s = 0.1;

  int dim() const { return static_cast<int>(parameters.size()); }
  int step_count() const;  // horizon_s / dt_s, validated integral

  // Index of a parameter by name, -1 if absent.
  int param_index(const std::string& name) const;
  const ActorTemplate& ego_actor() const;
  int npc_count() const;

  // Throws ValidationError on any broken invariant (empty box, inverted
  // range, duplicate names, missing/duplicate ego, bad timing).
  void validate() const;

  bool operator==(const LogicalScenario&) const = default;
};

// A point in the box of one logical scenario.
struct ConcreteScenario {
  std::string ls_id;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

// The six built-in scenarios: FB, CutIn1, CutIn2, OVTP, NJLT, NJRT.
// Deterministic; identical list on every call.
std::vector<LogicalScenario> builtin_catalog();

// Catalog entry by id; throws ValidationError for an unknown id.
LogicalScenario catalog_entry(const std::string& id);

// Parse/serialize the scenario config format (see README for the grammar:
// top-level key = value pairs plus repeated [[parameter]] and [[actor]]
// tables). parse validates the result; serialize(parse(x)) round-trips.
LogicalScenario parse_scenario_config(const std::string& text);
LogicalScenario load_scenario_config(const std::string& path);
std::string serialize_scenario_config(const LogicalScenario& ls);

// Clamp a raw vector into the parameter box. Throws ValidationError on a
// dimension mismatch.
ConcreteScenario clamp_to_box(const LogicalScenario& ls, std::span<const double> values,
                              std::uint64_t seed = 0);

}  // namespace scengen

#endif  // SCENGEN_SCENARIO_HPP
