#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "scengen/errors.hpp"
#include "scengen/flow.hpp"
#include "scengen/format.hpp"
#include "scengen/report.hpp"
#include "scengen/risk.hpp"
#include "scengen/scenario.hpp"
#include "scengen/scoring.hpp"
#include "scengen/search.hpp"
#include "scengen/sim.hpp"
#include "scengen/trajectory.hpp"
#include "scengen/version.hpp"

namespace fs = std::filesystem;

namespace {

using namespace scengen;

std::string omega_label(double omega) { return format_double(omega); }

std::string finite_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

LogicalScenario resolve_ls(const std::string& ls_id, const std::string& config_path) {
  if (!config_path.empty()) return load_scenario_config(config_path);
  if (ls_id.empty()) throw ValidationError("provide --ls <catalog id> or --config <file>");
  return catalog_entry(ls_id);
}

int check_omegas(const std::vector<double>& omegas) {
  for (const double w : omegas) {
    if (!(w >= 0.0 && w <= 1.0)) {
      std::cerr << "error: --omega " << format_double(w) << " is outside [0, 1]\n";
      return 1;
    }
  }
  return 0;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string ls_id, config_path, csv_path, out_path;
  int synthetic = 0;
  std::uint64_t seed = 0;
  double frame_rate = 10.0;
  bool meters = false;
  int epochs = 100, batch = 256, hidden = 64, flows = 5;
};

int cmd_train(const TrainArgs& a) {
  const LogicalScenario ls = resolve_ls(a.ls_id, a.config_path);
  std::vector<TrajectoryPoint> points;
  std::size_t skipped = 0;
  if (a.synthetic > 0) {
    points = synthetic_traffic(ls, a.synthetic, a.seed);
  } else if (!a.csv_path.empty()) {
    if (!fs::exists(a.csv_path)) {
      throw ValidationError("trajectory CSV '" + a.csv_path + "' does not exist");
    }
    CsvSchema schema = CsvSchema::ngsim();
    schema.frame_rate_hz = a.frame_rate;
    if (a.meters) schema.convert_feet = false;
    try {
      IngestResult ingested = ingest_csv(a.csv_path, schema);
      points = std::move(ingested.points);
      skipped = ingested.skipped_rows;
    } catch (const ParseError& e) {
      std::cerr << "error: no usable events in '" << a.csv_path << "': " << e.what() << "\n";
      return 2;
    }
  } else {
    throw ValidationError("provide --synthetic <n> or --csv <file>");
  }
  const std::vector<EventSample> events = extract_events(points, ls);
  if (events.size() < 200) {
    std::cerr << "error: extracted only " << events.size() << " events for " << ls.id
              << "; training needs at least 200\n";
    return 2;
  }
  TrainSettings settings;
  settings.epochs = a.epochs;
  settings.batch_size = a.batch;
  settings.hidden = a.hidden;
  settings.n_flows = a.flows;
  TrainReport rep;
  FlowModel model = train_flow(events, settings, a.seed, &rep);
  model.ls_id = ls.id;
  const std::string out = a.out_path.empty() ? ls.id + ".flow" : a.out_path;
  model.save(out);

  nlohmann::ordered_json j;
  j["ls_id"] = ls.id;
  j["sample_count"] = rep.sample_count;
  j["skipped_rows"] = skipped;
  j["epochs_run"] = rep.epochs_run;
  j["val_loglik"] = rep.val_loglik;
  j["final_train_loglik"] = rep.train_loglik.empty() ? 0.0 : rep.train_loglik.back();
  write_text(out + ".train.json", j.dump(2) + "\n");

  std::cout << "trained " << ls.id << ": " << rep.sample_count << " events, " << rep.epochs_run
            << " epochs, val loglik " << format_double(rep.val_loglik) << " -> " << out << "\n";
  return 0;
}

// ---- generate ------------------------------------------------------------

struct GenerateArgs {
  std::string ls_id, config_path, model_path, out_dir = "out";
  std::vector<double> omegas;
  int population = 20;
  int iterations = 15;
  double c_spec = 25.0;
  std::uint64_t seed = 0;
};

int cmd_generate(const GenerateArgs& a) {
  const LogicalScenario ls = resolve_ls(a.ls_id, a.config_path);
  const std::vector<double> omegas = a.omegas.empty() ? default_omega_set() : a.omegas;
  if (const int rc = check_omegas(omegas)) return rc;
  const std::string model_path = a.model_path.empty() ? ls.id + ".flow" : a.model_path;
  if (!fs::exists(model_path)) {
    std::cerr << "error: missing flow model '" << model_path
              << "'; train one first with `scengen train`\n";
    return 3;
  }
  const FlowModel model = FlowModel::load(model_path);
  if (model.dim() != ls.dim()) {
    throw ValidationError("flow model '" + model_path + "' has dimension " +
                          std::to_string(model.dim()) + " but " + ls.id + " needs " +
                          std::to_string(ls.dim()));
  }

  for (const double omega : omegas) {
    const std::string canonical = "ls=" + ls.id + ";omega=" + omega_label(omega) +
                                  ";N=" + std::to_string(a.population) +
                                  ";M=" + std::to_string(a.iterations) +
                                  ";C=" + format_double(a.c_spec) +
                                  ";seed=" + std::to_string(a.seed);
    SearchConfig cfg;
    cfg.omega = omega;
    cfg.population = a.population;
    cfg.iterations = a.iterations;
    cfg.c_spec = a.c_spec;
    cfg.seed = a.seed ^ fnv1a64("cell:" + ls.id + ":" + omega_label(omega));

    bool sim_abort = false;
    const Evaluator evaluator = [&](const ConcreteScenario& cs) -> EvalOutcome {
      SimulationTrace trace;
      try {
        trace = simulate(ls, cs);
      } catch (...) {
        sim_abort = true;
        throw;
      }
      const RiskReport rr = adv(trace);
      return {rr.adv_norm, model.nat_norm(model.log_likelihood(cs))};
    };

    SearchResult result;
    try {
      result = run_search(ls, cfg, evaluator);
    } catch (const std::exception& e) {
      if (sim_abort) {
        std::cerr << "error: simulation aborted: " << e.what() << "\n";
        return 4;
      }
      throw;
    }

    const fs::path cell = fs::path(a.out_dir) / ls.id / omega_label(omega);
    fs::create_directories(cell);
    std::vector<ScenarioRecord> records;
    std::vector<SimulationTrace> traces;
    for (std::size_t i = 0; i < result.particles.size(); ++i) {
      const SearchParticle& p = result.particles[i];
      const ConcreteScenario cs{ls.id, p.pbest_position, cfg.seed};
      const SimulationTrace trace = simulate(ls, cs);
      const RiskReport rr = adv(trace);
      const double loglik = model.log_likelihood(cs);
      const double nat = model.nat_norm(loglik);

      ScenarioRecord rec;
      rec.ls_id = ls.id;
      rec.omega = omega;
      rec.seed = cfg.seed;
      rec.values = p.pbest_position;
      rec.species = p.species_id;
      rec.species_best =
          result.species[static_cast<std::size_t>(p.species_id)].seed_index ==
          static_cast<int>(i);
      rec.g = objective_value(rr.adv_norm, nat, omega);
      rec.adv_raw = rr.adv_raw;
      rec.adv_norm = rr.adv_norm;
      rec.nat_loglik = loglik;
      rec.nat_norm = nat;
      rec.min_ttc_s = rr.min_ttc_s;
      for (const CollisionClass& c : rr.collision_types) {
        rec.collision_types.push_back(to_string(c));
      }
      rec.trace_file = "trace_" + std::to_string(i + 1) + ".csv";

      write_text(cell / rec.trace_file, trace_to_csv(trace));
      save_record((cell / ("scenario_" + std::to_string(i + 1) + ".record")).string(), rec);
      records.push_back(std::move(rec));
      traces.push_back(trace);
    }
    write_text(cell / "summary.csv", summary_csv(records));

    RunMetadata meta;
    meta.config_hash = config_fingerprint(canonical);
    meta.seed = a.seed;
    meta.tool_version = kToolVersion;
    meta.ls_id = ls.id;
    meta.omega = omega;
    meta.indicators = indicators(traces);
    write_text(cell / "run.json", run_metadata_json(meta));

    std::cout << "wrote " << records.size() << " scenarios to " << cell.string() << " (species "
              << result.species.size() << ", CR " << format_double(meta.indicators.cr) << ")\n";
  }
  return 0;
}

// ---- score ---------------------------------------------------------------

struct ScoreArgs {
  std::string in_dir = "out";
  std::string out_path;
  std::vector<double> omegas;
  int n_s = kScenariosPerCell;
  std::uint64_t seed = 0;
};

struct SummaryRow {
  double g = 0.0;
  double adv_norm = 0.0;
};

std::vector<SummaryRow> parse_summary_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty summary '" + path.string() + "'");
  std::vector<std::string> header;
  {
    std::string field;
    std::istringstream hs(line);
    while (std::getline(hs, field, ',')) header.push_back(field);
  }
  const auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ParseError("summary '" + path.string() + "' lacks column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_g = column("g");
  const std::size_t c_adv = column("adv_norm");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() <= std::max(c_g, c_adv)) {
      throw ParseError("short row in summary '" + path.string() + "'");
    }
    rows.push_back({std::strtod(fields[c_g].c_str(), nullptr),
                    std::strtod(fields[c_adv].c_str(), nullptr)});
  }
  return rows;
}

int cmd_score(const ScoreArgs& a) {
  const std::vector<double> omega_set = a.omegas.empty() ? default_omega_set() : a.omegas;
  if (const int rc = check_omegas(omega_set)) return rc;
  std::vector<std::string> type_ids;
  for (const LogicalScenario& ls : builtin_catalog()) type_ids.push_back(ls.id);

  std::vector<std::string> missing;
  for (const std::string& id : type_ids) {
    for (const double w : omega_set) {
      const fs::path cell = fs::path(a.in_dir) / id / omega_label(w);
      if (!fs::exists(cell / "summary.csv")) {
        missing.push_back(id + " omega=" + omega_label(w));
      }
    }
  }
  if (!missing.empty()) {
    std::cerr << "error: score grid is incomplete; missing cells:\n";
    for (const std::string& m : missing) std::cerr << "  " << m << "\n";
    return 5;
  }

  std::map<CellKey, double> cells;
  std::vector<ScoreRow> rows;
  for (const std::string& id : type_ids) {
    for (const double w : omega_set) {
      const fs::path cell = fs::path(a.in_dir) / id / omega_label(w);
      std::vector<SummaryRow> summary = parse_summary_csv(cell / "summary.csv");
      std::sort(summary.begin(), summary.end(),
                [](const SummaryRow& x, const SummaryRow& y) { return x.g > y.g; });
      if (static_cast<int>(summary.size()) > a.n_s) {
        summary.resize(static_cast<std::size_t>(a.n_s));
      }
      std::vector<RiskReport> reports;
      for (const SummaryRow& r : summary) {
        RiskReport rr;
        rr.adv_norm = r.adv_norm;
        reports.push_back(rr);
      }
      // Too few records: pad with freshly seeded random scenarios.
      const LogicalScenario ls = catalog_entry(id);
      RngStream rng = RngStream::substream(a.seed, fnv1a64("pad:" + id),
                                           static_cast<std::uint64_t>(std::llround(w * 1e9)));
      while (static_cast<int>(reports.size()) < a.n_s) {
        std::vector<double> values(static_cast<std::size_t>(ls.dim()));
        for (std::size_t d = 0; d < values.size(); ++d) {
          values[d] = rng.uniform(ls.parameters[d].lower, ls.parameters[d].upper);
        }
        const ConcreteScenario cs = clamp_to_box(ls, values, a.seed);
        reports.push_back(adv(simulate(ls, cs)));
      }
      const double q = q_cell(reports, a.n_s);
      cells[{id, w}] = q;

      const nlohmann::json run = nlohmann::json::parse(read_text(cell / "run.json"));
      const auto num = [&](const char* key) {
        const auto& v = run.at(key);
        if (v.is_string()) {
          const std::string s = v.get<std::string>();
          if (s == "inf") return std::numeric_limits<double>::infinity();
          if (s == "-inf") return -std::numeric_limits<double>::infinity();
          return std::strtod(s.c_str(), nullptr);
        }
        return v.get<double>();
      };
      rows.push_back({id, w, q, k_weight(w), num("cr"), num("act_s"), num("acd_m")});
    }
  }
  const double total = total_score(cells, omega_set, type_ids);
  const std::string csv = scores_csv(rows, total);
  const std::string out =
      a.out_path.empty() ? (fs::path(a.in_dir) / "scores.csv").string() : a.out_path;
  write_text(out, csv);
  std::cout << "total Q = " << format_double(total) << " -> " << out << "\n";
  return 0;
}

// ---- replay --------------------------------------------------------------

struct ReplayArgs {
  std::string record_path;
  std::string out_dir = "replay";
  std::string config_path;
};

int cmd_replay(const ReplayArgs& a) {
  if (!fs::exists(a.record_path)) {
    std::cerr << "error: missing scenario record '" << a.record_path << "'\n";
    return 6;
  }
  const ScenarioRecord rec = load_record(a.record_path);
  const LogicalScenario ls =
      a.config_path.empty() ? catalog_entry(rec.ls_id) : load_scenario_config(a.config_path);
  const ConcreteScenario cs{rec.ls_id, rec.values, rec.seed};
  const SimulationTrace trace = simulate(ls, cs);

  fs::create_directories(a.out_dir);
  write_text(fs::path(a.out_dir) / "trace.csv", trace_to_csv(trace));

  std::ostringstream ttc;
  ttc << "time,ttc_s\n";
  for (const Snapshot& snap : trace.steps) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < snap.actors.size(); ++j) {
      best = std::min(best, ttc_at_step(snap.actors[0], snap.actors[j],
                                        trace.actors[0].length_m, trace.actors[0].width_m,
                                        trace.actors[j].length_m, trace.actors[j].width_m));
    }
    ttc << format_double(snap.time_s) << ',' << finite_or_inf(best) << '\n';
  }
  write_text(fs::path(a.out_dir) / "ttc.csv", ttc.str());

  std::cout << "replayed " << rec.ls_id << ": " << trace.steps.size() << " steps, "
            << trace.collisions.size() << " collisions -> " << a.out_dir << "\n";
  return 0;
}

// ---- catalog -------------------------------------------------------------

struct CatalogArgs {
  std::string ls_id;
  std::string out_path;
};

int cmd_catalog(const CatalogArgs& a) {
  if (a.ls_id.empty()) {
    for (const LogicalScenario& ls : builtin_catalog()) {
      std::cout << ls.id << "  (" << to_string(ls.map_template) << ", " << ls.dim()
                << " parameters, " << ls.actors.size() << " actors)\n";
      std::cout << "  " << ls.description << "\n";
      for (const ParameterSpec& p : ls.parameters) {
        std::cout << "    " << p.name << " [" << format_double(p.lower) << ", "
                  << format_double(p.upper) << "] " << p.unit << "  " << p.description << "\n";
      }
    }
    return 0;
  }
  const LogicalScenario ls = catalog_entry(a.ls_id);
  const std::string text = serialize_scenario_config(ls);
  if (a.out_path.empty()) {
    std::cout << text;
  } else {
    write_text(a.out_path, text);
    std::cout << "wrote " << ls.id << " config to " << a.out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scengen: risk-tunable concrete traffic scenario generation"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  int rc = 0;

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train a naturalness model for a scenario");
  train->add_option("--ls", train_args.ls_id, "catalog scenario id");
  train->add_option("--config", train_args.config_path, "scenario config file");
  train->add_option("--csv", train_args.csv_path, "trajectory CSV to ingest");
  train->add_option("--synthetic", train_args.synthetic, "generate this many synthetic events");
  train->add_option("--seed", train_args.seed, "master seed");
  train->add_option("--out", train_args.out_path, "output model path (default <ls>.flow)");
  train->add_option("--frame-rate", train_args.frame_rate, "CSV frame rate in Hz");
  train->add_flag("--meters", train_args.meters, "CSV positions already in meters");
  train->add_option("--epochs", train_args.epochs, "training epochs");
  train->add_option("--batch", train_args.batch, "minibatch size");
  train->add_option("--hidden", train_args.hidden, "conditioner hidden width");
  train->add_option("--flows", train_args.flows, "number of stacked flows");
  train->callback([&] { rc = cmd_train(train_args); });

  GenerateArgs gen_args;
  CLI::App* gen = app.add_subcommand("generate", "search for scenarios at given risk levels");
  gen->add_option("--ls", gen_args.ls_id, "catalog scenario id");
  gen->add_option("--config", gen_args.config_path, "scenario config file");
  gen->add_option("--model", gen_args.model_path, "flow model path (default <ls>.flow)");
  gen->add_option("--out", gen_args.out_dir, "output directory");
  gen->add_option("--omega", gen_args.omegas, "risk levels in [0,1]")->delimiter(',');
  gen->add_option("-N,--population", gen_args.population, "swarm size");
  gen->add_option("-M,--iterations", gen_args.iterations, "swarm iterations");
  gen->add_option("--c-spec", gen_args.c_spec, "speciation constant");
  gen->add_option("--seed", gen_args.seed, "master seed");
  gen->callback([&] { rc = cmd_generate(gen_args); });

  ScoreArgs score_args;
  CLI::App* score = app.add_subcommand("score", "aggregate a generated grid into a safety score");
  score->add_option("--in", score_args.in_dir, "directory written by generate");
  score->add_option("--out", score_args.out_path, "score CSV path (default <in>/scores.csv)");
  score->add_option("--omega", score_args.omegas, "risk levels to aggregate")->delimiter(',');
  score->add_option("--per-cell", score_args.n_s, "scenarios per cell (n_s)");
  score->add_option("--seed", score_args.seed, "seed for padding re-simulation");
  score->callback([&] { rc = cmd_score(score_args); });

  ReplayArgs replay_args;
  CLI::App* replay = app.add_subcommand("replay", "re-simulate a stored scenario record");
  replay->add_option("--record", replay_args.record_path, "scenario record path")->required();
  replay->add_option("--out", replay_args.out_dir, "output directory");
  replay->add_option("--config", replay_args.config_path, "scenario config (for non-catalog ids)");
  replay->callback([&] { rc = cmd_replay(replay_args); });

  CatalogArgs catalog_args;
  CLI::App* catalog = app.add_subcommand("catalog", "list built-in scenarios or dump one");
  catalog->add_option("--ls", catalog_args.ls_id, "dump this scenario's config");
  catalog->add_option("--out", catalog_args.out_path, "write the config here");
  catalog->callback([&] { rc = cmd_catalog(catalog_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
