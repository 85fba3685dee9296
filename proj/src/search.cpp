#include "scengen/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "scengen/errors.hpp"
#include "scengen/format.hpp"
#include "scengen/rng.hpp"

namespace scengen {

namespace {

double pow_zero_safe(double base, double exponent) {
  if (exponent == 0.0) return 1.0;  // includes 0^0
  return std::pow(base, exponent);
}

}  // namespace

double objective_value(double adv_norm, double nat_norm, double omega) {
  const double base = pow_zero_safe(adv_norm, omega * omega) +
                      pow_zero_safe(nat_norm, (1.0 - omega) * (1.0 - omega));
  return std::pow(base, std::exp(omega * (1.0 - omega)));
}

std::vector<double> speciation_threshold(const LogicalScenario& ls, double c_spec) {
  if (c_spec <= 0.0) throw ValidationError("speciation constant must be positive");
  const double divisor = std::pow(c_spec, 1.0 / ls.dim());
  std::vector<double> tau;
  tau.reserve(ls.parameters.size());
  for (const auto& p : ls.parameters) tau.push_back((p.upper - p.lower) / divisor);
  return tau;
}

bool same_species(std::span<const double> p1, std::span<const double> p2,
                  std::span<const double> tau) {
  if (p1.size() != p2.size() || p1.size() != tau.size()) {
    throw ValidationError("same_species needs equal-length points and thresholds");
  }
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (std::abs(p1[i] - p2[i]) > tau[i]) return false;
  }
  return true;
}

std::vector<SpeciesGroup> speciate(const std::vector<std::vector<double>>& positions,
                                   const std::vector<double>& values,
                                   std::span<const double> tau) {
  if (positions.empty() || positions.size() != values.size()) {
    throw ValidationError("speciate needs matching non-empty positions and values");
  }
  std::vector<int> order(positions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] > values[b]; });

  std::vector<SpeciesGroup> groups;
  std::vector<bool> assigned(positions.size(), false);
  for (int seed : order) {
    if (assigned[seed]) continue;
    SpeciesGroup g;
    g.seed_index = seed;
    for (int candidate : order) {
      if (assigned[candidate]) continue;
      if (same_species(positions[candidate], positions[seed], tau)) {
        assigned[candidate] = true;
        g.members.push_back(candidate);
      }
    }
    std::sort(g.members.begin(), g.members.end());
    groups.push_back(std::move(g));
  }
  return groups;
}

namespace {

int thread_cap(int requested, std::size_t jobs) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 4;
  int cap = requested > 0 ? requested : hw;
  if (const char* env = std::getenv("OSG_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) cap = std::min(cap, v);
  }
  cap = std::min<std::size_t>(cap, jobs);
  return std::max(1, cap);
}

using CacheKey = std::vector<long long>;

CacheKey cache_key(const std::vector<double>& values) {
  CacheKey key;
  key.reserve(values.size());
  for (double v : values) key.push_back(std::llround(v * 1e9));
  return key;
}

std::string describe_values(const std::vector<double>& values) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ", ";
    os << format_double(values[i]);
  }
  os << ']';
  return os.str();
}

}  // namespace

SearchResult run_search(const LogicalScenario& ls, const SearchConfig& cfg,
                        const Evaluator& evaluator) {
  ls.validate();
  if (cfg.population < 2) throw ValidationError("population must be at least 2");
  if (cfg.iterations < 1) throw ValidationError("iterations must be at least 1");
  if (cfg.omega < 0.0 || cfg.omega > 1.0) {
    throw ValidationError("omega must lie in [0, 1]");
  }
  if (cfg.c_spec < 1.0) throw ValidationError("speciation constant must be >= 1");

  const int n = cfg.population;
  const int dims = ls.dim();
  const std::vector<double> tau = speciation_threshold(ls, cfg.c_spec);

  SearchResult result;
  result.particles.resize(n);
  for (int i = 0; i < n; ++i) {
    SearchParticle& p = result.particles[i];
    RngStream rng = RngStream::substream(cfg.seed, static_cast<std::uint64_t>(i), 0);
    p.position.resize(dims);
    p.velocity.assign(dims, 0.0);
    for (int d = 0; d < dims; ++d) {
      p.position[d] = rng.uniform(ls.parameters[d].lower, ls.parameters[d].upper);
    }
    p.pbest_position = p.position;
    p.pbest_value = -std::numeric_limits<double>::infinity();
  }

  std::map<CacheKey, EvalOutcome> cache;

  auto evaluate_population = [&]() {
    // Collect jobs for positions not seen before (first holder wins).
    std::vector<CacheKey> keys(n);
    std::vector<std::pair<CacheKey, std::vector<double>>> jobs;
    for (int i = 0; i < n; ++i) {
      keys[i] = cache_key(result.particles[i].position);
      if (cache.count(keys[i])) continue;
      bool queued = false;
      for (const auto& j : jobs) {
        if (j.first == keys[i]) {
          queued = true;
          break;
        }
      }
      if (!queued) jobs.emplace_back(keys[i], result.particles[i].position);
    }
    std::vector<EvalOutcome> outcomes(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    auto run_job = [&](std::size_t j) {
      ConcreteScenario cs;
      cs.ls_id = ls.id;
      cs.values = jobs[j].second;
      cs.seed = cfg.seed;
      try {
        outcomes[j] = evaluator(cs);
      } catch (...) {
        failures[j] = std::current_exception();
      }
    };
    const int workers = thread_cap(cfg.max_threads, jobs.size());
    if (workers <= 1) {
      for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
          for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) {
            run_job(j);
          }
        });
      }
      for (auto& t : pool) t.join();
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (failures[j]) {
        try {
          std::rethrow_exception(failures[j]);
        } catch (const std::exception& e) {
          throw ValidationError("evaluation failed at " + describe_values(jobs[j].second) +
                                ": " + e.what());
        }
      }
      cache.emplace(jobs[j].first, outcomes[j]);
      ++result.evaluations;
    }
    // Merge in particle-index order so concurrency cannot reorder effects.
    for (int i = 0; i < n; ++i) {
      const EvalOutcome& out = cache.at(keys[i]);
      const double g = objective_value(out.adv_norm, out.nat_norm, cfg.omega);
      SearchParticle& p = result.particles[i];
      if (g > p.pbest_value) {
        p.pbest_value = g;
        p.pbest_adv = out.adv_norm;
        p.pbest_nat = out.nat_norm;
        p.pbest_position = p.position;
      }
    }
  };

  std::vector<SpeciesGroup> groups;
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    evaluate_population();

    std::vector<std::vector<double>> pbest_positions;
    std::vector<double> pbest_values;
    pbest_positions.reserve(n);
    pbest_values.reserve(n);
    for (const auto& p : result.particles) {
      pbest_positions.push_back(p.pbest_position);
      pbest_values.push_back(p.pbest_value);
    }
    groups = speciate(pbest_positions, pbest_values, tau);

    std::vector<int> species_of(n, 0);
    std::vector<int> sbest_of(n, 0);  // particle index holding the species best
    for (std::size_t s = 0; s < groups.size(); ++s) {
      for (int m : groups[s].members) {
        species_of[m] = static_cast<int>(s);
        sbest_of[m] = groups[s].seed_index;
      }
    }
    for (int i = 0; i < n; ++i) result.particles[i].species_id = species_of[i];

    for (int i = 0; i < n; ++i) {
      SearchParticle& p = result.particles[i];
      const std::vector<double>& sbest = result.particles[sbest_of[i]].pbest_position;
      RngStream rng =
          RngStream::substream(cfg.seed, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(iter));
      for (int d = 0; d < dims; ++d) {
        const double range = ls.parameters[d].upper - ls.parameters[d].lower;
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        double v = cfg.inertia * p.velocity[d] +
                   cfg.cognitive * r1 * (p.pbest_position[d] - p.position[d]) +
                   cfg.social * r2 * (sbest[d] - p.position[d]);
        const double vmax = 0.5 * range;
        p.velocity[d] = std::clamp(v, -vmax, vmax);
        p.position[d] = std::clamp(p.position[d] + p.velocity[d], ls.parameters[d].lower,
                                   ls.parameters[d].upper);
      }
    }
  }

  result.species.reserve(groups.size());
  for (std::size_t s = 0; s < groups.size(); ++s) {
    SpeciesResult sr;
    sr.seed_index = groups[s].seed_index;
    sr.members = groups[s].members;
    const SearchParticle& seed = result.particles[sr.seed_index];
    sr.sbest_position = seed.pbest_position;
    sr.sbest_value = seed.pbest_value;
    sr.sbest_adv = seed.pbest_adv;
    sr.sbest_nat = seed.pbest_nat;
    result.species.push_back(std::move(sr));
  }
  return result;
}

}  // namespace scengen
