#include "searchlab/landscape.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "searchlab/error.h"
#include "searchlab/rng.h"

namespace searchlab {

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "searchlab-landscape";

void check_dimensions(int n, int k) {
  if (n < 1) throw ParameterError("landscape: n must be positive");
  if (n > kMaxExhaustiveN) {
    throw CapacityError("landscape: n > " + std::to_string(kMaxExhaustiveN) +
                        " exceeds the exhaustive analysis bound");
  }
  if (k < 0 || k > n - 1) {
    throw ParameterError("landscape: k must lie in [0, n-1], got k=" + std::to_string(k) +
                         " for n=" + std::to_string(n));
  }
}

}  // namespace

Landscape Landscape::generate(int n, int k, std::uint64_t seed) {
  check_dimensions(n, k);
  Landscape l;
  l.n_ = n;
  l.k_ = k;
  l.seed_ = seed;

  Rng rng(seed);

  // Neighbor draw: partial Fisher-Yates over the other n-1 decisions.
  l.neighbors_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<int> pool;
    pool.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j) {
      if (j != i) pool.push_back(j);
    }
    auto& nb = l.neighbors_[static_cast<std::size_t>(i)];
    nb.reserve(static_cast<std::size_t>(k));
    for (int draw = 0; draw < k; ++draw) {
      const auto pick = static_cast<std::size_t>(draw) +
                        bounded_uint(rng, pool.size() - static_cast<std::size_t>(draw));
      std::swap(pool[static_cast<std::size_t>(draw)], pool[pick]);
      nb.push_back(pool[static_cast<std::size_t>(draw)]);
    }
  }

  const std::size_t table_size = std::size_t{1} << (k + 1);
  l.contributions_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& table = l.contributions_[static_cast<std::size_t>(i)];
    table.reserve(table_size);
    for (std::size_t t = 0; t < table_size; ++t) table.push_back(next_double(rng));
  }

  l.validate_and_cache_max();
  return l;
}

Landscape Landscape::from_parts(int n, int k, std::uint64_t seed,
                                std::vector<std::vector<int>> neighbors,
                                std::vector<std::vector<double>> contributions) {
  check_dimensions(n, k);
  Landscape l;
  l.n_ = n;
  l.k_ = k;
  l.seed_ = seed;
  l.neighbors_ = std::move(neighbors);
  l.contributions_ = std::move(contributions);
  l.validate_and_cache_max();
  return l;
}

void Landscape::validate_and_cache_max() {
  if (static_cast<int>(neighbors_.size()) != n_) {
    throw ParameterError("landscape: neighbor list count must equal n");
  }
  if (static_cast<int>(contributions_.size()) != n_) {
    throw ParameterError("landscape: contribution table count must equal n");
  }
  const std::size_t table_size = std::size_t{1} << (k_ + 1);
  for (int i = 0; i < n_; ++i) {
    const auto& nb = neighbors_[static_cast<std::size_t>(i)];
    if (static_cast<int>(nb.size()) != k_) {
      throw ParameterError("landscape: decision " + std::to_string(i) + " must have exactly k neighbors");
    }
    std::vector<int> sorted = nb;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      if (sorted[j] < 0 || sorted[j] >= n_) {
        throw ParameterError("landscape: neighbor index out of range for decision " + std::to_string(i));
      }
      if (sorted[j] == i) {
        throw ParameterError("landscape: decision " + std::to_string(i) + " lists itself as a neighbor");
      }
      if (j > 0 && sorted[j] == sorted[j - 1]) {
        throw ParameterError("landscape: duplicate neighbor for decision " + std::to_string(i));
      }
    }
    const auto& table = contributions_[static_cast<std::size_t>(i)];
    if (table.size() != table_size) {
      throw ParameterError("landscape: decision " + std::to_string(i) + " needs 2^(k+1) contribution values");
    }
    for (const double v : table) {
      if (!(v >= 0.0 && v < 1.0)) {
        throw ParameterError("landscape: contribution values must lie in [0,1)");
      }
    }
  }

  const std::uint32_t states = std::uint32_t{1} << n_;
  double best = -1.0;
  for (std::uint32_t s = 0; s < states; ++s) best = std::max(best, fitness_by_index(s));
  global_max_fitness_ = best;
}

double Landscape::fitness_by_index(std::uint32_t index) const {
  double sum = 0.0;
  for (int i = 0; i < n_; ++i) {
    std::size_t idx = (index >> i) & 1u;
    const auto& nb = neighbors_[static_cast<std::size_t>(i)];
    for (int j = 0; j < k_; ++j) {
      idx |= static_cast<std::size_t>((index >> nb[static_cast<std::size_t>(j)]) & 1u) << (j + 1);
    }
    sum += contributions_[static_cast<std::size_t>(i)][idx];
  }
  return sum / n_;
}

double Landscape::fitness(const Configuration& c) const {
  if (c.size() != n_) {
    throw ParameterError("fitness: configuration length " + std::to_string(c.size()) +
                         " does not match landscape n=" + std::to_string(n_));
  }
  return fitness_by_index(c.to_index());
}

double Landscape::payoff_points(const Configuration& c) const {
  // Grouped so the optimum divides itself exactly and scores 100.0 on the dot.
  return 100.0 * (fitness(c) / global_max_fitness_);
}

LandscapeStats Landscape::enumerate_optima() const {
  const std::uint32_t states = std::uint32_t{1} << n_;
  std::vector<double> table(states);
  for (std::uint32_t s = 0; s < states; ++s) table[s] = fitness_by_index(s);

  LandscapeStats stats;
  std::uint32_t best_state = 0;
  for (std::uint32_t s = 0; s < states; ++s) {
    bool is_local = true;
    for (int i = 0; i < n_ && is_local; ++i) {
      if (table[s ^ (std::uint32_t{1} << i)] >= table[s]) is_local = false;
    }
    if (is_local) stats.local_optima.emplace_back(Configuration::from_index(s, n_), table[s]);
    if (table[s] > table[best_state]) best_state = s;
  }
  stats.global_optimum = {Configuration::from_index(best_state, n_), table[best_state]};
  return stats;
}

std::string Landscape::save() const {
  nlohmann::json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["rng"] = std::string(kRngAlgorithmId);
  j["n"] = n_;
  j["k"] = k_;
  j["seed"] = seed_;
  j["neighbors"] = neighbors_;
  j["contributions"] = contributions_;
  j["global_max_fitness"] = global_max_fitness_;
  return j.dump(2) + "\n";
}

Landscape Landscape::load(const std::string& bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("landscape: malformed document: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != kFormatName || !j.contains("version")) {
      throw FormatError("landscape: not a " + std::string(kFormatName) + " document");
    }
    if (j["version"].get<int>() != kFormatVersion) {
      throw FormatError("landscape: unsupported version " + j["version"].dump() + ", expected version " +
                        std::to_string(kFormatVersion));
    }
    Landscape l = from_parts(j["n"].get<int>(), j["k"].get<int>(), j["seed"].get<std::uint64_t>(),
                             j["neighbors"].get<std::vector<std::vector<int>>>(),
                             j["contributions"].get<std::vector<std::vector<double>>>());
    // The cached maximum is recomputed by from_parts; reject documents whose
    // recorded value disagrees with their own tables.
    const double recorded = j["global_max_fitness"].get<double>();
    if (std::abs(recorded - l.global_max_fitness()) > 1e-12) {
      throw FormatError("landscape: recorded global_max_fitness disagrees with contribution tables");
    }
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("landscape: invalid field: ") + e.what());
  }
}

}  // namespace searchlab
