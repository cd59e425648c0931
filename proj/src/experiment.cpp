#include "searchlab/experiment.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "searchlab/error.h"
#include "searchlab/hash.h"
#include "searchlab/landscape.h"
#include "searchlab/run_store.h"
#include "searchlab/version.h"

namespace searchlab {

using nlohmann::json;

namespace {

// Seed-derivation tags; far above the small indices used for trials and
// population slots, so streams never collide.
constexpr std::uint64_t kGameTag = 0x67616d65;      // game seed per run
constexpr std::uint64_t kProviderTag = 0x70726f76;  // simulated-provider seed per run
constexpr std::uint64_t kLandscapeTag = 1000;       // + k: population seed per landscape

std::string now_iso() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
  }
  return true;
}

AgentSpec parse_agent_spec(const json& j, const char* where) {
  try {
    return agent_spec_from_json(j.dump());
  } catch (const Error& e) {
    throw ConfigError(std::string(where) + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config is not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    if (j.at("format").get<std::string>() != "searchlab-experiment") {
      throw ConfigError("format must be \"searchlab-experiment\"");
    }
    if (j.at("version").get<int>() != 1) throw ConfigError("unsupported config version");

    cfg.name = j.at("name").get<std::string>();
    if (!valid_name(cfg.name)) {
      throw ConfigError("name must be non-empty and use only letters, digits, '-', '_'");
    }

    const json& land = j.at("landscape");
    cfg.n = land.at("n").get<int>();
    if (cfg.n < 1 || cfg.n > kMaxExhaustiveN) {
      throw ConfigError("landscape.n must be in 1.." + std::to_string(kMaxExhaustiveN));
    }
    cfg.landscape_seed = land.at("seed").get<std::uint64_t>();
    for (const auto& kv : land.at("k")) {
      const int k = kv.get<int>();
      if (k < 0 || k >= cfg.n) {
        throw ConfigError("landscape.k entries must lie in 0..n-1");
      }
      if (std::find(cfg.k_list.begin(), cfg.k_list.end(), k) != cfg.k_list.end()) {
        throw ConfigError("landscape.k repeats " + std::to_string(k));
      }
      cfg.k_list.push_back(k);
    }
    if (cfg.k_list.empty()) throw ConfigError("landscape.k must name at least one landscape");

    cfg.trials = j.value("trials", 24);
    if (cfg.trials < 1) throw ConfigError("trials must be positive");
    try {
      cfg.objective = objective_from_string(j.value("objective", "wealth"));
      cfg.framing = framing_from_string(j.value("framing", "alien"));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    cfg.think_aloud = j.value("think_aloud", false);
    const std::string role = j.value("instructions_role", "system");
    if (role != "system" && role != "user") {
      throw ConfigError("instructions_role must be \"system\" or \"user\"");
    }
    cfg.instructions_role = role == "system" ? Role::system : Role::user;

    const json& pop = j.at("population");
    cfg.population.base = parse_agent_spec(pop.at("base").at("spec"), "population.base.spec");
    cfg.population.base_count = pop.at("base").at("count").get<int>();
    if (cfg.population.base_count < 1) throw ConfigError("population.base.count must be >= 1");
    if (pop.contains("extras")) {
      for (const auto& ex : pop.at("extras")) {
        PopulationMix::Extra extra;
        extra.spec = parse_agent_spec(ex.at("spec"), "population.extras[].spec");
        extra.fraction = ex.at("fraction").get<double>();
        if (extra.fraction < 0.0) throw ConfigError("population extra fraction must be >= 0");
        cfg.population.extras.push_back(std::move(extra));
      }
    }

    if (j.contains("providers")) {
      for (const auto& [label, pj] : j.at("providers").items()) {
        if (label.empty()) throw ConfigError("provider labels must be non-empty");
        ProviderConfig pc;
        try {
          pc = provider_config_from_json(pj.dump());
        } catch (const Error& e) {
          throw ConfigError("providers." + label + ": " + e.what());
        }
        if (pc.kind == "scripted") {
          throw ConfigError("providers." + label +
                            ": kind \"scripted\" is in-process test plumbing; use \"simulated\" "
                            "or \"openai\"");
        }
        cfg.providers.emplace(label, std::move(pc));
      }
    }

    cfg.master_seed = j.value("master_seed", std::uint64_t{0});
    cfg.parallelism = j.value("parallelism", 1);
    if (cfg.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    cfg.output_dir = j.value("output_dir", "out/" + cfg.name);
    if (cfg.output_dir.empty()) throw ConfigError("output_dir must be non-empty");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }

  // Experiment-level protocol settings override whatever the agent specs say,
  // so one header line fully describes the condition a run was under.
  auto apply = [&](AgentSpec& spec) {
    spec.params.framing = cfg.framing;
    spec.params.think_aloud = cfg.think_aloud;
    spec.params.objective = cfg.objective;
    spec.params.instructions_role = cfg.instructions_role;
    validate_agent_spec(spec);
    if (spec.kind == "llm" && cfg.providers.find(spec.model_label) == cfg.providers.end()) {
      throw ConfigError("model label \"" + spec.model_label + "\" has no provider config");
    }
  };
  apply(cfg.population.base);
  for (auto& extra : cfg.population.extras) apply(extra.spec);

  cfg.config_hash = sha256_hex(j.dump());
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open experiment config " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return experiment_config_from_json(text);
}

namespace {

// Drops an unterminated final line (crash artifact); the record it held was
// never acknowledged, and appending after it would corrupt the store.
void repair_partial_tail(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) return;
  std::string content;
  {
    std::ifstream in(file, std::ios::binary);
    content.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  if (content.empty() || content.back() == '\n') return;
  const std::size_t last = content.find_last_of('\n');
  std::filesystem::resize_file(file, last == std::string::npos ? 0 : last + 1);
}

struct PlannedRun {
  std::string run_id;
  int attempt = 1;
  int k = 0;
  AgentSpec spec;
};

std::string make_run_id(const std::string& name, int k, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "a%04d", index);
  return name + "-k" + std::to_string(k) + "-" + buf;
}

// Store writer plus the rolling hash chain and manifest, all under one lock.
struct StoreState {
  StoreState(const std::filesystem::path& dir_) : dir(dir_), writer(dir_) {}

  std::filesystem::path dir;
  RunStoreWriter writer;
  std::mutex mu;
  long line_count = 0;
  std::string chain;
  Manifest manifest;

  // Callers hold mu.
  void append(const nlohmann::json& record) {
    const std::string line = writer.append(record);
    ++line_count;
    chain = sha256_hex(chain + "\n" + line);
  }

  void seal_run(const std::string& run_id, int attempt, RunStatus status) {
    manifest.runs.push_back({run_id, attempt, to_string(status)});
    manifest.line_count = line_count;
    manifest.chain = chain;
    manifest.finished_at = now_iso();
    write_manifest(dir, manifest);
  }
};

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config, std::ostream& log) {
  const std::filesystem::path out = config.output_dir;
  std::filesystem::create_directories(out);

  // Resumption state from a previous (possibly interrupted) invocation.
  std::set<std::string> done;
  std::map<std::string, int> prior_attempt;
  std::vector<ManifestEntry> ledger;
  std::string started_at = now_iso();
  if (std::filesystem::exists(out / kRunsFile)) {
    repair_partial_tail(out / kRunsFile);
    verify_store(out);
    const StoreContents prior = read_store(out);
    for (const auto& hash : prior.config_hashes) {
      if (hash != config.config_hash) {
        throw ConfigError("run store at " + out.string() +
                          " was written under a different configuration (config hash mismatch)");
      }
    }
    for (const auto& sr : prior.runs) {
      prior_attempt[sr.run.run_id] = sr.attempt;
      if (sr.has_end) {
        ledger.push_back({sr.run.run_id, sr.attempt, to_string(sr.run.status)});
        if (sr.run.status == RunStatus::complete) done.insert(sr.run.run_id);
      }
    }
    if (std::filesystem::exists(out / kManifestFile)) {
      started_at = read_manifest(out).started_at;
    }
  }

  StoreState store(out);
  {
    const auto [count, chain] = chain_over_lines(out);
    store.line_count = count;
    store.chain = chain;
  }
  store.manifest.experiment_name = config.name;
  store.manifest.config_hash = config.config_hash;
  store.manifest.tool_version = kToolVersion;
  store.manifest.rng = kRngAlgorithmId;
  store.manifest.instructions_hash = instructions_hash(config.framing, config.think_aloud,
                                                       config.objective, config.n, config.trials);
  store.manifest.quiz_hash = quiz_hash(config.trials);
  store.manifest.lexicon_hash = lexicon_hash();
  store.manifest.rubric_hash = rubric_hash();
  store.manifest.template_note =
      "instruction and quiz texts are this tool's reconstructions, not the original lab materials";
  store.manifest.started_at = started_at;
  store.manifest.runs = std::move(ledger);

  // Landscapes and the run plan.
  std::map<int, Landscape> landscapes;
  for (int k : config.k_list) {
    landscapes.emplace(k, Landscape::generate(config.n, k, config.landscape_seed));
  }

  ExperimentSummary summary;
  std::vector<PlannedRun> plan;
  for (int k : config.k_list) {
    const auto specs =
        sample_population(config.population, derive_seed(config.master_seed, kLandscapeTag + k));
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const std::string run_id = make_run_id(config.name, k, static_cast<int>(i));
      ++summary.total;
      if (done.count(run_id) != 0) {
        ++summary.skipped;
        summary.outcomes.push_back({run_id, prior_attempt[run_id], RunStatus::complete, true, ""});
        continue;
      }
      const auto it = prior_attempt.find(run_id);
      plan.push_back({run_id, it == prior_attempt.end() ? 1 : it->second + 1, k, specs[i]});
    }
  }
  if (summary.skipped > 0) {
    log << summary.skipped << " run(s) already complete, skipping\n";
  }

  // Live providers are shared per label so the concurrency gate is global;
  // simulated providers are per-run, seeded from the agent, so scheduling
  // order cannot leak into the results.
  std::map<std::string, std::shared_ptr<Client>> shared_clients;
  for (const auto& [label, pc] : config.providers) {
    if (pc.kind == "openai") {
      shared_clients.emplace(label, std::make_shared<Client>(make_provider(pc), pc));
    }
  }

  std::vector<RunOutcome> executed(plan.size());
  std::atomic<std::size_t> next{0};
  std::mutex fail_mu;
  std::exception_ptr failure;

  auto execute_one = [&](const PlannedRun& p, RunOutcome& outcome) {
    const Landscape& land = landscapes.at(p.k);
    GameState game(land, derive_seed(p.spec.agent_seed, kGameTag), config.trials);

    std::shared_ptr<Client> client;
    if (p.spec.kind == "llm") {
      const ProviderConfig& pc = config.providers.at(p.spec.model_label);
      if (pc.kind == "openai") {
        client = shared_clients.at(p.spec.model_label);
      } else {
        ProviderConfig local = pc;
        local.seed = derive_seed(p.spec.agent_seed, kProviderTag);
        client = std::make_shared<Client>(
            std::make_shared<SimulatedMockProvider>(local.seed, config.n), local);
      }
    }

    std::unique_ptr<Agent> agent = make_agent(p.spec, config.n, config.trials, client);
    auto* llm = dynamic_cast<LlmAgent*>(agent.get());
    if (llm != nullptr) {
      llm->set_call_logger([&](const std::string& purpose, int trial,
                               const std::vector<ChatMessage>& messages,
                               const CompletionResult& result) {
        std::lock_guard<std::mutex> lock(store.mu);
        store.append(llm_call_record(p.run_id, p.attempt, purpose, trial, messages, result));
      });
    }

    {
      std::lock_guard<std::mutex> lock(store.mu);
      store.append(run_header_record(p.run_id, p.attempt, p.spec,
                                     LandscapeRef{config.n, p.k, config.landscape_seed},
                                     derive_seed(p.spec.agent_seed, kGameTag), config.trials,
                                     config.objective, game.start_config(), game.start_payoff(),
                                     config.config_hash));
    }

    RunStatus status = RunStatus::complete;
    std::string error;
    std::optional<bool> quiz_passed;
    try {
      if (llm != nullptr) {
        ComprehensionResult quiz = llm->run_comprehension_test();
        {
          std::lock_guard<std::mutex> lock(store.mu);
          store.append(comprehension_record(p.run_id, p.attempt, quiz, 1));
        }
        if (!quiz.passed) {  // one retest, then proceed either way, on the record
          quiz = llm->run_comprehension_test();
          std::lock_guard<std::mutex> lock(store.mu);
          store.append(comprehension_record(p.run_id, p.attempt, quiz, 2));
        }
        quiz_passed = quiz.passed;
      }
      while (!game.closed()) {
        const Action act = agent->next_move(observe(game));
        game.submit(act.config, act.raw_text);
        std::lock_guard<std::mutex> lock(store.mu);
        store.append(trial_record_line(p.run_id, p.attempt, game.trials().back()));
      }
    } catch (const ParseError& e) {
      status = RunStatus::aborted_parse;
      error = e.what();
    } catch (const ProviderError& e) {  // includes context overflow
      status = RunStatus::aborted_provider;
      error = e.what();
    }

    const double final_wealth = game.trials().empty() ? 0.0 : game.trials().back().wealth;
    {
      std::lock_guard<std::mutex> lock(store.mu);
      store.append(run_end_record(p.run_id, p.attempt, status, game.trials_done(), final_wealth,
                                  game.best_payoff(), quiz_passed, error));
      store.seal_run(p.run_id, p.attempt, status);
      log << "run " << p.run_id << " attempt " << p.attempt << ": " << to_string(status);
      if (status == RunStatus::complete) {
        log << " (wealth " << final_wealth << ", best " << game.best_payoff() << ")";
      }
      log << "\n";
    }
    outcome = {p.run_id, p.attempt, status, false, error};
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plan.size()) return;
      try {
        execute_one(plan[i], executed[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (!failure) failure = std::current_exception();
        next.store(plan.size());  // stop handing out work
        return;
      }
    }
  };

  const int threads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), plan.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& outcome : executed) {
    if (outcome.run_id.empty()) continue;  // unreached after a failure stop
    if (outcome.status == RunStatus::complete) {
      ++summary.completed;
    } else {
      ++summary.aborted;
    }
    summary.outcomes.push_back(std::move(outcome));
  }
  return summary;
}

}  // namespace searchlab
