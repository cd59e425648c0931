#include "searchlab/game.h"

#include "searchlab/error.h"
#include "searchlab/rng.h"

namespace searchlab {

std::string to_string(Objective o) {
  return o == Objective::wealth ? "wealth" : "peak";
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::complete: return "complete";
    case RunStatus::aborted_parse: return "aborted_parse";
    case RunStatus::aborted_provider: return "aborted_provider";
  }
  return "complete";
}

Objective objective_from_string(const std::string& s) {
  if (s == "wealth") return Objective::wealth;
  if (s == "peak") return Objective::peak;
  throw ParameterError("unknown objective '" + s + "'");
}

RunStatus run_status_from_string(const std::string& s) {
  if (s == "complete") return RunStatus::complete;
  if (s == "aborted_parse") return RunStatus::aborted_parse;
  if (s == "aborted_provider") return RunStatus::aborted_provider;
  throw ParameterError("unknown run status '" + s + "'");
}

GameState::GameState(const Landscape& landscape, std::uint64_t game_seed, int trials)
    : landscape_(&landscape), trials_total_(trials) {
  if (trials < 1) throw ParameterError("game: trials must be >= 1");
  Rng rng(game_seed);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(landscape.n()));
  for (auto& b : bits) b = static_cast<std::uint8_t>(bounded_uint(rng, 2));
  start_config_ = Configuration(std::move(bits));
  start_payoff_ = landscape.payoff_points(start_config_);
  best_config_ = start_config_;
  best_payoff_ = start_payoff_;
  trials_.reserve(static_cast<std::size_t>(trials));
}

Feedback GameState::submit(const Configuration& c, std::string thought_text) {
  if (closed()) {
    throw ProtocolError("game: submission after trial " + std::to_string(trials_total_));
  }
  if (c.size() != landscape_->n()) {
    throw ParameterError("game: configuration length " + std::to_string(c.size()) +
                         " does not match landscape n=" + std::to_string(landscape_->n()));
  }

  TrialRecord rec;
  rec.trial = trials_done() + 1;
  rec.config = c;
  rec.payoff = landscape_->payoff_points(c);
  rec.distance = hamming(c, best_config_);
  rec.active = rec.distance > 0;
  rec.thought_text = std::move(thought_text);
  wealth_ += rec.payoff;
  rec.wealth = wealth_;
  trials_.push_back(rec);

  // Strict improvement moves the best; ties keep the earliest holder.
  if (rec.payoff > best_payoff_) {
    best_payoff_ = rec.payoff;
    best_config_ = c;
  }
  return Feedback{rec.trial, rec.payoff, wealth_};
}

namespace {

// Best configuration among the start and trials 1..t-1, earliest on ties.
const Configuration& best_prior(const RunRecord& run, int t) {
  const Configuration* best = &run.start_config;
  double best_payoff = run.start_payoff;
  for (int i = 0; i < t - 1; ++i) {
    const auto& trial = run.trials[static_cast<std::size_t>(i)];
    if (trial.payoff > best_payoff) {
      best_payoff = trial.payoff;
      best = &trial.config;
    }
  }
  return *best;
}

}  // namespace

int search_distance(const RunRecord& run, int t) {
  if (t < 1 || t > static_cast<int>(run.trials.size())) {
    throw ParameterError("search_distance: trial " + std::to_string(t) + " out of range");
  }
  return hamming(run.trials[static_cast<std::size_t>(t - 1)].config, best_prior(run, t));
}

bool is_active(const RunRecord& run, int t) {
  return search_distance(run, t) > 0;
}

std::optional<int> stop_trial(const RunRecord& run) {
  if (run.status != RunStatus::complete ||
      static_cast<int>(run.trials.size()) != run.trials_planned) {
    throw StateError("stop_trial: run " + run.run_id + " is not complete");
  }
  const int total = static_cast<int>(run.trials.size());
  int last_active = 0;
  for (int t = 1; t <= total; ++t) {
    if (is_active(run, t)) last_active = t;
  }
  if (last_active == total) return std::nullopt;
  return last_active + 1;
}

}  // namespace searchlab
