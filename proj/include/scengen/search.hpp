#ifndef SCENGEN_SEARCH_HPP
#define SCENGEN_SEARCH_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "scengen/scenario.hpp"

namespace scengen {

// Blended objective: (adv^(w^2) + nat^((1-w)^2))^(e^(w(1-w))) with the
// 0^0 = 1 convention, so w = 0 ranks purely by nat and w = 1 purely by adv.
double objective_value(double adv_norm, double nat_norm, double omega);

// Per-dimension species radius: (b_i - a_i) / C^(1/D).
std::vector<double> speciation_threshold(const LogicalScenario& ls, double c_spec);

// True iff the two points differ by at most tau on every dimension.
bool same_species(std::span<const double> p1, std::span<const double> p2,
                  std::span<const double> tau);

struct SpeciesGroup {
  int seed_index = 0;          // index of the fittest member
  std::vector<int> members;    // ascending particle indices, seed included
};

// Greedy fitness-sorted speciation: the best unassigned point seeds a
// species and absorbs every unassigned point within tau of it. Ties in
// value break toward the lower index, so the partition is deterministic.
std::vector<SpeciesGroup> speciate(const std::vector<std::vector<double>>& positions,
                                   const std::vector<double>& values,
                                   std::span<const double> tau);

struct SearchConfig {
  double omega = 0.5;
  int population = 20;      // N
  int iterations = 15;      // M
  double c_spec = 25.0;     // speciation constant C
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  std::uint64_t seed = 0;
  int max_threads = 0;  // 0 = hardware count; OSG_THREADS lowers it further
};

struct EvalOutcome {
  double adv_norm = 0.0;
  double nat_norm = 0.0;
};

// Must be a pure function of cs.values (results are memoized and may be
// computed on any thread).
using Evaluator = std::function<EvalOutcome(const ConcreteScenario&)>;

struct SearchParticle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> pbest_position;
  double pbest_value = 0.0;
  double pbest_adv = 0.0;
  double pbest_nat = 0.0;
  int species_id = 0;  // index into SearchResult::species
};

struct SpeciesResult {
  int seed_index = 0;
  std::vector<int> members;
  std::vector<double> sbest_position;
  double sbest_value = 0.0;
  double sbest_adv = 0.0;
  double sbest_nat = 0.0;
};

struct SearchResult {
  std::vector<SearchParticle> particles;
  std::vector<SpeciesResult> species;
  int evaluations = 0;  // evaluator calls after memoization
};

// Speciation-based particle swarm over the scenario box. Deterministic for
// a fixed cfg.seed, independent of evaluation concurrency.
SearchResult run_search(const LogicalScenario& ls, const SearchConfig& cfg,
                        const Evaluator& evaluator);

}  // namespace scengen

#endif  // SCENGEN_SEARCH_HPP
