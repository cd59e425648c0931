#ifndef SEARCHLAB_EXPERIMENT_H
#define SEARCHLAB_EXPERIMENT_H

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "searchlab/agents.h"
#include "searchlab/llm_client.h"

namespace searchlab {

// A full experiment description, normally loaded from a JSON file. Framing,
// think-aloud, objective, and instruction placement are experiment-level and
// pushed into every agent spec so a run header is self-describing.
struct ExperimentConfig {
  std::string name;
  int n = 10;
  std::vector<int> k_list;
  std::uint64_t landscape_seed = 0;
  int trials = 24;
  Objective objective = Objective::wealth;
  Framing framing = Framing::alien;
  bool think_aloud = false;
  Role instructions_role = Role::system;
  PopulationMix population;
  std::map<std::string, ProviderConfig> providers;  // keyed by model label
  std::uint64_t master_seed = 0;
  int parallelism = 1;
  std::string output_dir;
  std::string config_hash;  // of the canonicalized config JSON
};

// Parses and validates; throws ConfigError naming the offending field.
ExperimentConfig experiment_config_from_json(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

struct RunOutcome {
  std::string run_id;
  int attempt = 1;
  RunStatus status = RunStatus::complete;
  bool skipped = false;  // already complete in the store, not re-executed
  std::string error;
};

struct ExperimentSummary {
  long total = 0;  // planned runs, including skipped
  long completed = 0;
  long aborted = 0;
  long skipped = 0;
  std::vector<RunOutcome> outcomes;
};

// Executes every (k, agent) run into the config's output directory: header,
// comprehension test for llm agents, the trial loop, and a run_end record,
// all appended crash-safe with the manifest rewritten after each run. Runs
// already complete in the store are skipped; interrupted or aborted ones are
// retried under the next attempt number. Aborted runs are recorded, never
// raised; configuration and integrity problems throw.
ExperimentSummary run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace searchlab

#endif  // SEARCHLAB_EXPERIMENT_H
