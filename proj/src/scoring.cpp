#include "scengen/scoring.hpp"

#include <cmath>
#include <limits>

#include "scengen/errors.hpp"
#include "scengen/format.hpp"

namespace scengen {

std::vector<double> default_omega_set() { return {0.0, 0.3, 0.5, 0.7, 1.0}; }

double q_cell(const std::vector<RiskReport>& reports, int n_s) {
  if (static_cast<int>(reports.size()) != n_s) {
    throw ValidationError("q_cell expects exactly " + std::to_string(n_s) +
                          " reports, got " + std::to_string(reports.size()));
  }
  double sum = 0.0;
  for (const auto& r : reports) sum += 1.0 - r.adv_norm;
  return 100.0 / n_s * sum;
}

double k_weight(double omega) {
  const double d = omega - 0.5;
  return std::exp(-(d * d) / (2.0 * 0.1 * 0.1));
}

double total_score(const std::map<CellKey, double>& cells,
                   const std::vector<double>& omega_set,
                   const std::vector<std::string>& type_ids) {
  if (omega_set.empty() || type_ids.empty()) {
    throw ValidationError("total_score needs non-empty omega set and type list");
  }
  // Weighted mean centered on the plain mean: exact for constant grids
  // (the correction term is identically zero) and better conditioned when
  // the tail weights are tiny.
  double value_sum = 0.0;
  int count = 0;
  for (double omega : omega_set) {
    for (const auto& id : type_ids) {
      auto it = cells.find({id, omega});
      if (it == cells.end()) {
        throw ValidationError("missing score cell (" + id + ", omega=" +
                              format_double(omega) + ")");
      }
      value_sum += it->second;
      ++count;
    }
  }
  const double pivot = value_sum / count;
  double correction = 0.0;
  double weight_sum = 0.0;
  for (double omega : omega_set) {
    const double k = k_weight(omega);
    for (const auto& id : type_ids) {
      correction += k * (cells.find({id, omega})->second - pivot);
      weight_sum += k;
    }
  }
  return pivot + correction / weight_sum;
}

ScoreBook make_score_book(const std::map<CellKey, double>& cells,
                          const std::vector<double>& omega_set,
                          const std::vector<std::string>& type_ids, int n_s) {
  ScoreBook book;
  book.per_cell = cells;
  book.omega_set = omega_set;
  book.n_s = n_s;
  for (double omega : omega_set) book.weights[omega] = k_weight(omega);
  book.total = total_score(cells, omega_set, type_ids);
  return book;
}

IndicatorReport indicators(const std::vector<SimulationTrace>& traces) {
  if (traces.empty()) throw ValidationError("indicators need at least one trace");
  IndicatorReport rep;
  rep.scenario_count = static_cast<int>(traces.size());
  for (const auto& t : traces) {
    if (!t.collisions.empty()) ++rep.collided_count;
    rep.total_time_s += t.sim_time_s;
    rep.total_distance_m += t.ego_distance_m;
  }
  rep.cr = static_cast<double>(rep.collided_count) / rep.scenario_count;
  if (rep.collided_count > 0) {
    rep.act_s = rep.total_time_s / rep.collided_count;
    rep.acd_m = rep.total_distance_m / rep.collided_count;
  } else {
    rep.act_s = std::numeric_limits<double>::infinity();
    rep.acd_m = std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace scengen
