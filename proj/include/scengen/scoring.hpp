#ifndef SCENGEN_SCORING_HPP
#define SCENGEN_SCORING_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scengen/risk.hpp"
#include "scengen/sim.hpp"

namespace scengen {

inline constexpr int kScenariosPerCell = 20;  // n_s

// Default risk-level grid the safety score is evaluated on.
std::vector<double> default_omega_set();  // {0.0, 0.3, 0.5, 0.7, 1.0}

// Cell score: (100 / n_s) * sum(1 - adv_norm). 100 means collision-free and
// relaxed, 0 means every scenario maximally critical.
// Throws ValidationError unless reports.size() == n_s.
double q_cell(const std::vector<RiskReport>& reports, int n_s = kScenariosPerCell);

// Gaussian emphasis on mid-risk cells: exp(-(omega - 0.5)^2 / (2 * 0.1^2)).
double k_weight(double omega);

using CellKey = std::pair<std::string, double>;  // (scenario id, omega)

// Weighted mean of the per-cell scores over type_ids x omega_set.
// A missing cell raises ValidationError naming (id, omega).
double total_score(const std::map<CellKey, double>& cells,
                   const std::vector<double>& omega_set,
                   const std::vector<std::string>& type_ids);

struct ScoreBook {
  std::map<CellKey, double> per_cell;
  std::map<double, double> weights;  // omega -> K(omega)
  double total = 0.0;
  int n_s = kScenariosPerCell;
  std::vector<double> omega_set;
};

ScoreBook make_score_book(const std::map<CellKey, double>& cells,
                          const std::vector<double>& omega_set,
                          const std::vector<std::string>& type_ids,
                          int n_s = kScenariosPerCell);

struct IndicatorReport {
  double cr = 0.0;     // collided scenarios / all scenarios
  double act_s = 0.0;  // total simulated time / collided scenarios (+inf if none)
  double acd_m = 0.0;  // total ego distance / collided scenarios (+inf if none)
  int scenario_count = 0;
  int collided_count = 0;
  double total_time_s = 0.0;
  double total_distance_m = 0.0;
};

// Aggregates a batch of traces; a scenario counts as collided when its
// trace holds at least one collision. Throws ValidationError when empty.
IndicatorReport indicators(const std::vector<SimulationTrace>& traces);

}  // namespace scengen

#endif  // SCENGEN_SCORING_HPP
