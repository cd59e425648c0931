#include "searchlab/run_store.h"

#include <algorithm>

#include "searchlab/error.h"
#include "searchlab/hash.h"

namespace searchlab {

using nlohmann::json;

nlohmann::json run_header_record(const std::string& run_id, int attempt, const AgentSpec& agent,
                                 const LandscapeRef& landscape, std::uint64_t game_seed,
                                 int trials_planned, Objective objective,
                                 const Configuration& start_config, double start_payoff,
                                 const std::string& config_hash) {
  json j;
  j["record"] = "run_header";
  j["run_id"] = run_id;
  j["attempt"] = attempt;
  j["agent"] = json::parse(agent_spec_to_json(agent));
  j["agent_label"] = agent.model_label.empty() ? agent.kind : agent.model_label;
  j["landscape"] = {{"n", landscape.n}, {"k", landscape.k}, {"seed", landscape.seed}};
  j["game_seed"] = game_seed;
  j["trials_planned"] = trials_planned;
  j["objective"] = to_string(objective);
  j["start_config"] = start_config.to_string();
  j["start_payoff"] = start_payoff;
  j["config_hash"] = config_hash;
  j["instructions_hash"] = instructions_hash(agent.params.framing, agent.params.think_aloud,
                                             agent.params.objective, landscape.n, trials_planned);
  j["quiz_hash"] = quiz_hash(trials_planned);
  if (agent.kind == "llm") {
    j["instructions_text"] = render_instructions(agent.params.framing, agent.params.think_aloud,
                                                 agent.params.objective, landscape.n,
                                                 trials_planned);
  }
  return j;
}

nlohmann::json comprehension_record(const std::string& run_id, int attempt,
                                    const ComprehensionResult& result, int round) {
  json j;
  j["record"] = "comprehension";
  j["run_id"] = run_id;
  j["attempt"] = attempt;
  j["round"] = round;
  j["passed"] = result.passed;
  j["answers"] = result.answers;
  j["raw_reply"] = result.raw_reply;
  return j;
}

nlohmann::json llm_call_record(const std::string& run_id, int attempt, const std::string& purpose,
                               int trial, const std::vector<ChatMessage>& messages_appended,
                               const CompletionResult& result) {
  json msgs = json::array();
  for (const auto& m : messages_appended) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  json j;
  j["record"] = "llm_call";
  j["run_id"] = run_id;
  j["attempt"] = attempt;
  j["purpose"] = purpose;
  j["trial"] = trial;
  j["messages"] = std::move(msgs);
  j["prompt_tokens"] = result.usage.prompt_tokens;
  j["completion_tokens"] = result.usage.completion_tokens;
  j["retries_used"] = result.retries_used;
  return j;
}

nlohmann::json trial_record_line(const std::string& run_id, int attempt, const TrialRecord& trial) {
  json j;
  j["record"] = "trial";
  j["run_id"] = run_id;
  j["attempt"] = attempt;
  j["trial"] = trial.trial;
  j["config"] = trial.config.to_string();
  j["payoff"] = trial.payoff;
  j["wealth"] = trial.wealth;
  j["distance"] = trial.distance;
  j["active"] = trial.active;
  j["thought_text"] = trial.thought_text;
  return j;
}

nlohmann::json run_end_record(const std::string& run_id, int attempt, RunStatus status,
                              int trials_done, double final_wealth, double best_payoff,
                              std::optional<bool> comprehension_passed, const std::string& error) {
  json j;
  j["record"] = "run_end";
  j["run_id"] = run_id;
  j["attempt"] = attempt;
  j["status"] = to_string(status);
  j["trials_done"] = trials_done;
  j["final_wealth"] = final_wealth;
  j["best_payoff"] = best_payoff;
  if (comprehension_passed) {
    j["comprehension_passed"] = *comprehension_passed;
  } else {
    j["comprehension_passed"] = nullptr;
  }
  if (!error.empty()) j["error"] = error;
  return j;
}

nlohmann::json annotation_record(const ThoughtAnnotation& annotation,
                                 const std::string& lexicon_hash, const std::string& rubric_hash,
                                 bool empty_text) {
  json segs = json::array();
  for (const auto& seg : annotation.segments) {
    segs.push_back({{"begin", seg.span.begin}, {"end", seg.span.end}, {"label", seg.label}});
  }
  json j;
  j["record"] = "annotation";
  j["run_id"] = annotation.run_id;
  j["trial"] = annotation.trial;
  j["classifier"] = to_string(annotation.classifier);
  j["forward_chars"] = annotation.forward_chars;
  j["backward_chars"] = annotation.backward_chars;
  j["breadth"] = annotation.breadth;
  j["segments"] = std::move(segs);
  j["lexicon_hash"] = lexicon_hash;
  j["rubric_hash"] = rubric_hash;
  j["empty_text"] = empty_text;
  return j;
}

RunStoreWriter::RunStoreWriter(const std::filesystem::path& dir, const char* file) {
  std::filesystem::create_directories(dir);
  path_ = dir / file;
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw StateError("cannot open " + path_.string() + " for appending");
}

std::string RunStoreWriter::append(const nlohmann::json& record) {
  std::string line = record.dump();
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw StateError("write to " + path_.string() + " failed");
  return line;
}

namespace {

// Reads complete lines; a final unterminated line is returned only when it
// holds parseable JSON, otherwise it is reported as a crash artifact.
std::vector<std::string> read_lines(const std::filesystem::path& file, bool* trailing_partial) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) {
      const std::string tail = content.substr(pos);
      if (!tail.empty() && json::accept(tail)) {
        lines.push_back(tail);
      } else if (trailing_partial != nullptr) {
        *trailing_partial = true;
      }
      break;
    }
    lines.push_back(content.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

LandscapeRef landscape_from_json(const json& j) {
  LandscapeRef ref;
  ref.n = j.at("n").get<int>();
  ref.k = j.at("k").get<int>();
  ref.seed = j.at("seed").get<std::uint64_t>();
  return ref;
}

}  // namespace

StoreContents read_store(const std::filesystem::path& dir) {
  const auto file = dir / kRunsFile;
  StoreContents contents;
  const std::vector<std::string> lines = read_lines(file, &contents.trailing_partial_line);
  contents.line_count = static_cast<long>(lines.size());

  // (run_id, attempt) -> partial run; attempts never interleave with smaller
  // attempts of the same run, but runs may interleave with each other.
  std::map<std::pair<std::string, int>, StoredRun> partial;
  std::vector<std::string> run_order;

  long line_no = 0;
  for (const auto& line : lines) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(file.string() + ":" + std::to_string(line_no) +
                        ": invalid record: " + e.what());
    }
    try {
      const std::string record = j.at("record").get<std::string>();
      if (record == "annotation") continue;  // wrong file, but harmless
      const std::string run_id = j.at("run_id").get<std::string>();
      const int attempt = j.at("attempt").get<int>();
      const auto key = std::make_pair(run_id, attempt);

      if (record == "run_header") {
        StoredRun sr;
        sr.attempt = attempt;
        sr.agent = agent_spec_from_json(j.at("agent").dump());
        sr.game_seed = j.at("game_seed").get<std::uint64_t>();
        sr.config_hash = j.at("config_hash").get<std::string>();
        sr.run.run_id = run_id;
        sr.run.agent_label = j.at("agent_label").get<std::string>();
        sr.run.landscape = landscape_from_json(j.at("landscape"));
        sr.run.start_config = Configuration::from_string(j.at("start_config").get<std::string>());
        sr.run.start_payoff = j.at("start_payoff").get<double>();
        sr.run.trials_planned = j.at("trials_planned").get<int>();
        sr.run.objective = objective_from_string(j.at("objective").get<std::string>());
        if (partial.find(key) != partial.end()) {
          throw FormatError("duplicate run_header for " + run_id + " attempt " +
                            std::to_string(attempt));
        }
        if (std::find(run_order.begin(), run_order.end(), run_id) == run_order.end()) {
          run_order.push_back(run_id);
        }
        if (std::find(contents.config_hashes.begin(), contents.config_hashes.end(),
                      sr.config_hash) == contents.config_hashes.end()) {
          contents.config_hashes.push_back(sr.config_hash);
        }
        partial.emplace(key, std::move(sr));
        continue;
      }

      const auto it = partial.find(key);
      if (it == partial.end()) {
        throw FormatError(file.string() + ":" + std::to_string(line_no) + ": " + record +
                          " record for " + run_id + " attempt " + std::to_string(attempt) +
                          " precedes its run_header");
      }
      StoredRun& sr = it->second;
      if (record == "trial") {
        TrialRecord tr;
        tr.trial = j.at("trial").get<int>();
        tr.config = Configuration::from_string(j.at("config").get<std::string>());
        tr.payoff = j.at("payoff").get<double>();
        tr.wealth = j.at("wealth").get<double>();
        tr.distance = j.at("distance").get<int>();
        tr.active = j.at("active").get<bool>();
        tr.thought_text = j.at("thought_text").get<std::string>();
        sr.run.trials.push_back(std::move(tr));
      } else if (record == "comprehension") {
        sr.comprehension_passed = j.at("passed").get<bool>();
      } else if (record == "run_end") {
        sr.has_end = true;
        sr.run.status = run_status_from_string(j.at("status").get<std::string>());
        if (j.contains("error")) sr.error = j.at("error").get<std::string>();
      } else if (record == "llm_call") {
        // Transcript material; not needed to assemble the run.
      } else {
        throw FormatError(file.string() + ":" + std::to_string(line_no) +
                          ": unknown record type '" + record + "'");
      }
    } catch (const json::exception& e) {
      throw FormatError(file.string() + ":" + std::to_string(line_no) + ": bad field: " + e.what());
    }
  }

  for (const auto& run_id : run_order) {
    int best_attempt = -1;
    for (const auto& [key, sr] : partial) {
      if (key.first == run_id) best_attempt = std::max(best_attempt, key.second);
    }
    auto node = partial.extract(std::make_pair(run_id, best_attempt));
    contents.runs.push_back(std::move(node.mapped()));
  }
  return contents;
}

AnnotationIndex read_annotations(const std::filesystem::path& dir) {
  const auto file = dir / kAnnotationsFile;
  AnnotationIndex index;
  if (!std::filesystem::exists(file)) return index;
  bool partial = false;
  const auto lines = read_lines(file, &partial);
  long line_no = 0;
  for (const auto& line : lines) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ThoughtAnnotation a;
      a.run_id = j.at("run_id").get<std::string>();
      a.trial = j.at("trial").get<int>();
      a.classifier = classifier_mode_from_string(j.at("classifier").get<std::string>());
      a.forward_chars = j.at("forward_chars").get<long>();
      a.backward_chars = j.at("backward_chars").get<long>();
      a.breadth = j.at("breadth").get<int>();
      for (const auto& seg : j.at("segments")) {
        a.segments.push_back({{seg.at("begin").get<std::size_t>(), seg.at("end").get<std::size_t>()},
                              seg.at("label").get<std::string>()});
      }
      index[{a.run_id, a.trial}] = std::move(a);
    } catch (const json::exception& e) {
      throw FormatError(file.string() + ":" + std::to_string(line_no) +
                        ": bad annotation: " + e.what());
    }
  }
  return index;
}

std::map<std::pair<std::string, int>, std::pair<std::string, std::string>> read_annotation_hashes(
    const std::filesystem::path& dir) {
  const auto file = dir / kAnnotationsFile;
  std::map<std::pair<std::string, int>, std::pair<std::string, std::string>> out;
  if (!std::filesystem::exists(file)) return out;
  bool partial = false;
  const auto lines = read_lines(file, &partial);
  for (const auto& line : lines) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out[{j.at("run_id").get<std::string>(), j.at("trial").get<int>()}] = {
          j.at("lexicon_hash").get<std::string>(), j.at("rubric_hash").get<std::string>()};
    } catch (const json::exception&) {
      continue;  // hash map is advisory; read_annotations reports real errors
    }
  }
  return out;
}

void write_manifest(const std::filesystem::path& dir, const Manifest& manifest) {
  json runs = json::array();
  for (const auto& entry : manifest.runs) {
    runs.push_back({{"run_id", entry.run_id}, {"attempt", entry.attempt}, {"status", entry.status}});
  }
  json j;
  j["format"] = "searchlab-manifest";
  j["version"] = 1;
  j["experiment_name"] = manifest.experiment_name;
  j["config_hash"] = manifest.config_hash;
  j["tool_version"] = manifest.tool_version;
  j["rng"] = manifest.rng;
  j["fixtures"] = {{"instructions", manifest.instructions_hash},
                   {"quiz", manifest.quiz_hash},
                   {"lexicon", manifest.lexicon_hash},
                   {"rubric", manifest.rubric_hash}};
  j["template_note"] = manifest.template_note;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["store"] = {{"line_count", manifest.line_count}, {"chain", manifest.chain}};
  j["runs"] = std::move(runs);

  const auto tmp = dir / (std::string(kManifestFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StateError("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, dir / kManifestFile);
}

Manifest read_manifest(const std::filesystem::path& dir) {
  const auto file = dir / kManifestFile;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": invalid manifest: " + e.what());
  }
  Manifest m;
  try {
    if (j.at("format").get<std::string>() != "searchlab-manifest") {
      throw FormatError(file.string() + ": not a manifest file");
    }
    if (j.at("version").get<int>() != 1) {
      throw FormatError(file.string() + ": manifest version " +
                        std::to_string(j.at("version").get<int>()) + " unsupported (expected 1)");
    }
    m.experiment_name = j.at("experiment_name").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.rng = j.at("rng").get<std::string>();
    m.instructions_hash = j.at("fixtures").at("instructions").get<std::string>();
    m.quiz_hash = j.at("fixtures").at("quiz").get<std::string>();
    m.lexicon_hash = j.at("fixtures").at("lexicon").get<std::string>();
    m.rubric_hash = j.at("fixtures").at("rubric").get<std::string>();
    m.template_note = j.at("template_note").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.line_count = j.at("store").at("line_count").get<long>();
    m.chain = j.at("store").at("chain").get<std::string>();
    for (const auto& entry : j.at("runs")) {
      m.runs.push_back({entry.at("run_id").get<std::string>(), entry.at("attempt").get<int>(),
                        entry.at("status").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": bad manifest field: " + e.what());
  }
  return m;
}

std::pair<long, std::string> chain_over_lines(const std::filesystem::path& dir, long line_count) {
  bool partial = false;
  const auto lines = read_lines(dir / kRunsFile, &partial);
  const long limit = line_count < 0 ? static_cast<long>(lines.size())
                                    : std::min<long>(line_count, static_cast<long>(lines.size()));
  std::string chain = sha256_hex("searchlab-store-v1");
  for (long i = 0; i < limit; ++i) {
    chain = sha256_hex(chain + "\n" + lines[static_cast<std::size_t>(i)]);
  }
  return {limit, chain};
}

void verify_store(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / kManifestFile)) return;  // nothing recorded yet
  const Manifest manifest = read_manifest(dir);
  const auto [covered, chain] = chain_over_lines(dir, manifest.line_count);
  if (covered < manifest.line_count) {
    throw IntegrityError("run store has " + std::to_string(covered) +
                         " lines but the manifest covers " + std::to_string(manifest.line_count) +
                         "; records were removed");
  }
  if (chain != manifest.chain) {
    throw IntegrityError("run store hash chain mismatch: stored records differ from what the "
                         "manifest sealed");
  }
}

}  // namespace searchlab
