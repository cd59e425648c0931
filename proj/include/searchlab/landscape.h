#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "searchlab/configuration.h"

namespace searchlab {

// Exhaustive scans (global-optimum caching, optima enumeration) are limited
// to this many decisions; 2^20 states is still desk scale.
inline constexpr int kMaxExhaustiveN = 20;

struct LandscapeStats {
  // Every configuration whose fitness strictly exceeds all single-bit-flip
  // neighbors, in ascending configuration-index order.
  std::vector<std::pair<Configuration, double>> local_optima;
  std::pair<Configuration, double> global_optimum;
};

// An NK fitness landscape over n binary decisions. Each decision i draws its
// performance contribution from a table indexed by its own state and the
// states of k other decisions, so k tunes the ruggedness of the landscape.
// Immutable after construction and safe to share across threads.
class Landscape {
 public:
  // Deterministically generates a landscape from (n, k, seed): k distinct
  // neighbors per decision drawn uniformly without replacement, contribution
  // values i.i.d. uniform [0,1). The global maximum is found by exhaustive
  // enumeration and cached, which bounds n at kMaxExhaustiveN.
  static Landscape generate(int n, int k, std::uint64_t seed);

  // Builds a landscape from explicit tables (used by load() and by tests
  // that pin contribution values by hand). Validates all invariants and
  // computes the global maximum.
  static Landscape from_parts(int n, int k, std::uint64_t seed,
                              std::vector<std::vector<int>> neighbors,
                              std::vector<std::vector<double>> contributions);

  int n() const { return n_; }
  int k() const { return k_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
  const std::vector<std::vector<double>>& contributions() const { return contributions_; }
  double global_max_fitness() const { return global_max_fitness_; }

  // Mean over decisions of the contribution selected by the decision's own
  // state and its neighbors' states. Pure; result lies in [0,1).
  double fitness(const Configuration& c) const;

  // Same fitness over the packed configuration index (bit i = decision i).
  double fitness_by_index(std::uint32_t index) const;

  // Display payoff: 100 * fitness / global_max_fitness, so the global
  // optimum scores exactly 100 points.
  double payoff_points(const Configuration& c) const;

  // Scans all 2^n configurations for strict local optima.
  LandscapeStats enumerate_optima() const;

  // Self-describing JSON document with a format version tag.
  std::string save() const;
  static Landscape load(const std::string& bytes);

  bool operator==(const Landscape&) const = default;

 private:
  Landscape() = default;
  void validate_and_cache_max();

  int n_ = 0;
  int k_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<double>> contributions_;
  double global_max_fitness_ = 0.0;
};

struct LandscapeRef {
  int n = 0;
  int k = 0;
  std::uint64_t seed = 0;
  bool operator==(const LandscapeRef&) const = default;
};

}  // namespace searchlab
