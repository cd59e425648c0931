#ifndef SEARCHLAB_RUN_STORE_H
#define SEARCHLAB_RUN_STORE_H

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchlab/agents.h"
#include "searchlab/annotate.h"
#include "searchlab/game.h"

namespace searchlab {

// Append-only, line-delimited store: one experiment directory holding
// runs.jsonl (every event as it happened), annotations.jsonl, and
// manifest.json. Lines never carry wall-clock fields, so equal inputs give
// byte-equal stores; timestamps live in the manifest only.
inline const char* kRunsFile = "runs.jsonl";
inline const char* kAnnotationsFile = "annotations.jsonl";
inline const char* kManifestFile = "manifest.json";

// Record builders. Every line carries "record" (its type), "run_id", and
// "attempt" so interrupted attempts can be retried without rewriting history;
// readers keep the highest attempt per run.
nlohmann::json run_header_record(const std::string& run_id, int attempt, const AgentSpec& agent,
                                 const LandscapeRef& landscape, std::uint64_t game_seed,
                                 int trials_planned, Objective objective,
                                 const Configuration& start_config, double start_payoff,
                                 const std::string& config_hash);
nlohmann::json comprehension_record(const std::string& run_id, int attempt,
                                    const ComprehensionResult& result, int round);
nlohmann::json llm_call_record(const std::string& run_id, int attempt, const std::string& purpose,
                               int trial, const std::vector<ChatMessage>& messages_appended,
                               const CompletionResult& result);
nlohmann::json trial_record_line(const std::string& run_id, int attempt, const TrialRecord& trial);
nlohmann::json run_end_record(const std::string& run_id, int attempt, RunStatus status,
                              int trials_done, double final_wealth, double best_payoff,
                              std::optional<bool> comprehension_passed,
                              const std::string& error = std::string());

nlohmann::json annotation_record(const ThoughtAnnotation& annotation,
                                 const std::string& lexicon_hash, const std::string& rubric_hash,
                                 bool empty_text);

// Serialized appender; every line is flushed as written so a crash never
// loses acknowledged records.
class RunStoreWriter {
 public:
  explicit RunStoreWriter(const std::filesystem::path& dir, const char* file = kRunsFile);
  // Returns the exact line written, for incremental chain maintenance.
  std::string append(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

struct StoredRun {
  RunRecord run;
  AgentSpec agent;
  std::uint64_t game_seed = 0;
  int attempt = 1;
  bool has_end = false;  // false: attempt was cut short (no run_end line)
  std::optional<bool> comprehension_passed;
  std::string config_hash;
  std::string error;
};

struct StoreContents {
  std::vector<StoredRun> runs;  // highest attempt per run_id, in first-seen order
  bool trailing_partial_line = false;
  std::vector<std::string> config_hashes;  // distinct, in first-seen order
  long line_count = 0;                     // complete lines
};

// Reads runs.jsonl back. A trailing half-written line (crash artifact) is
// tolerated and flagged; corrupt interior lines are not.
StoreContents read_store(const std::filesystem::path& dir);

// Last-record-wins view of annotations.jsonl; missing file reads empty.
AnnotationIndex read_annotations(const std::filesystem::path& dir);

// Fixture hashes of the already-stored annotation per (run_id, trial), used
// for idempotent re-annotation.
std::map<std::pair<std::string, int>, std::pair<std::string, std::string>> read_annotation_hashes(
    const std::filesystem::path& dir);

struct ManifestEntry {
  std::string run_id;
  int attempt = 1;
  std::string status;
};

struct Manifest {
  std::string experiment_name;
  std::string config_hash;
  std::string tool_version;
  std::string rng;
  std::string instructions_hash;
  std::string quiz_hash;
  std::string lexicon_hash;
  std::string rubric_hash;
  std::string template_note;
  std::string started_at;   // ISO 8601, informational only
  std::string finished_at;  // ISO 8601, informational only
  long line_count = 0;      // lines of runs.jsonl covered by `chain`
  std::string chain;        // rolling SHA-256 over those lines
  std::vector<ManifestEntry> runs;
};

void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& dir);

// Rolling hash over the first `line_count` lines of runs.jsonl (all lines
// when line_count < 0): h := sha256(h_prev + "\n" + line).
std::pair<long, std::string> chain_over_lines(const std::filesystem::path& dir,
                                              long line_count = -1);

// Confirms the manifest's chain still matches the stored lines it covers.
// Lines beyond the covered prefix are fine (an interrupted attempt); altered
// covered lines are not. Throws IntegrityError on mismatch.
void verify_store(const std::filesystem::path& dir);

}  // namespace searchlab

#endif  // SEARCHLAB_RUN_STORE_H
