#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "searchlab/configuration.h"
#include "searchlab/landscape.h"

namespace searchlab {

enum class Objective { wealth, peak };
enum class RunStatus { complete, aborted_parse, aborted_provider };

std::string to_string(Objective o);
std::string to_string(RunStatus s);
Objective objective_from_string(const std::string& s);
RunStatus run_status_from_string(const std::string& s);

struct TrialRecord {
  int trial = 0;  // 1-based
  Configuration config;
  double payoff = 0.0;   // points in [0, 100]
  double wealth = 0.0;   // cumulative points through this trial
  int distance = 0;      // Hamming distance to the best prior configuration
  bool active = false;   // distance > 0
  std::string thought_text;
};

struct RunRecord {
  std::string run_id;
  std::string agent_label;
  LandscapeRef landscape;
  Configuration start_config;
  double start_payoff = 0.0;
  std::vector<TrialRecord> trials;
  Objective objective = Objective::wealth;
  RunStatus status = RunStatus::complete;
  int trials_planned = 0;
};

struct Feedback {
  int trial_index = 0;  // 1-based index of the submission just scored
  double payoff = 0.0;
  double wealth = 0.0;
};

// A sale game on one landscape: a known start configuration, then a fixed
// number of submissions, each scored and added to wealth. The start payoff
// is disclosed up front but is informational only; wealth counts submitted
// trials alone. Single-owner, mutated only by its driving run loop.
class GameState {
 public:
  // Draws a uniform-random start configuration from game_seed and discloses
  // its payoff.
  GameState(const Landscape& landscape, std::uint64_t game_seed, int trials = 24);

  const Landscape& landscape() const { return *landscape_; }
  const Configuration& start_config() const { return start_config_; }
  double start_payoff() const { return start_payoff_; }
  int trials_total() const { return trials_total_; }
  int trials_done() const { return static_cast<int>(trials_.size()); }
  int trials_remaining() const { return trials_total_ - trials_done(); }
  bool closed() const { return trials_done() >= trials_total_; }
  const std::vector<TrialRecord>& trials() const { return trials_; }

  // The best configuration observed so far: the start configuration plus all
  // scored submissions, highest payoff first, earliest on ties.
  const Configuration& best_config() const { return best_config_; }
  double best_payoff() const { return best_payoff_; }

  // Scores a submission, appends its TrialRecord, and returns the numbers
  // that get rendered into the agent's feedback message.
  Feedback submit(const Configuration& c, std::string thought_text = std::string());

 private:
  const Landscape* landscape_;
  int trials_total_;
  Configuration start_config_;
  double start_payoff_ = 0.0;
  Configuration best_config_;
  double best_payoff_ = 0.0;
  double wealth_ = 0.0;
  std::vector<TrialRecord> trials_;
};

// Hamming distance from trial t's configuration to the best-payoff
// configuration among the start and trials 1..t-1 (earliest wins ties).
// t is 1-based; the run must hold at least t trials.
int search_distance(const RunRecord& run, int t);

// Whether trial t changed anything relative to the best prior configuration.
bool is_active(const RunRecord& run, int t);

// Smallest trial s such that every trial at or after s is inactive; absent
// when the final trial is still active. Requires a complete run.
std::optional<int> stop_trial(const RunRecord& run);

}  // namespace searchlab
