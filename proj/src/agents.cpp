#include "searchlab/agents.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "searchlab/error.h"

namespace searchlab {

using nlohmann::json;

void validate_agent_spec(const AgentSpec& spec) {
  const bool known = spec.kind == "llm" || spec.kind == "local_search" ||
                     spec.kind == "hill_climb" || spec.kind == "random" || spec.kind == "replay";
  if (!known) throw ParameterError("unknown agent kind '" + spec.kind + "'");
  if (spec.kind == "llm" && spec.model_label.empty()) {
    throw ParameterError("llm agent needs a model_label naming a provider");
  }
  if (spec.kind == "local_search") {
    if (spec.params.p_longjump < 0.0 || spec.params.p_longjump > 1.0) {
      throw ParameterError("p_longjump must lie in [0, 1]");
    }
    if (spec.params.patience < 0) throw ParameterError("patience must be >= 0");
  }
}

std::string agent_spec_to_json(const AgentSpec& spec) {
  json j;
  j["kind"] = spec.kind;
  j["model_label"] = spec.model_label;
  j["agent_seed"] = spec.agent_seed;
  j["params"] = {{"p_longjump", spec.params.p_longjump},
                 {"patience", spec.params.patience},
                 {"framing", to_string(spec.params.framing)},
                 {"think_aloud", spec.params.think_aloud},
                 {"objective", to_string(spec.params.objective)},
                 {"instructions_role", to_string(spec.params.instructions_role)},
                 {"replay_source", spec.params.replay_source}};
  return j.dump();
}

AgentSpec agent_spec_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("agent spec is not valid JSON: ") + e.what());
  }
  AgentSpec spec;
  try {
    if (j.contains("kind")) spec.kind = j.at("kind").get<std::string>();
    if (j.contains("model_label")) spec.model_label = j.at("model_label").get<std::string>();
    if (j.contains("agent_seed")) spec.agent_seed = j.at("agent_seed").get<std::uint64_t>();
    if (j.contains("params")) {
      const auto& p = j.at("params");
      if (p.contains("p_longjump")) spec.params.p_longjump = p.at("p_longjump").get<double>();
      if (p.contains("patience")) spec.params.patience = p.at("patience").get<int>();
      if (p.contains("framing"))
        spec.params.framing = framing_from_string(p.at("framing").get<std::string>());
      if (p.contains("think_aloud")) spec.params.think_aloud = p.at("think_aloud").get<bool>();
      if (p.contains("objective"))
        spec.params.objective = objective_from_string(p.at("objective").get<std::string>());
      if (p.contains("instructions_role"))
        spec.params.instructions_role = role_from_string(p.at("instructions_role").get<std::string>());
      if (p.contains("replay_source"))
        spec.params.replay_source = p.at("replay_source").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("agent spec field has the wrong type: ") + e.what());
  }
  validate_agent_spec(spec);
  return spec;
}

Observable observe(const GameState& game) {
  Observable view;
  view.n = game.landscape().n();
  view.trials_total = game.trials_total();
  view.start_config = &game.start_config();
  view.start_payoff = game.start_payoff();
  view.history = &game.trials();
  return view;
}

namespace {

std::string format_points(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string render_config_lines(const Configuration& c, const std::vector<std::string>& names) {
  std::string out;
  for (int i = 0; i < c.size(); ++i) {
    out += names[static_cast<std::size_t>(i)];
    out += c.bit(i) ? ": on\n" : ": off\n";
  }
  return out;
}

// The best configuration disclosed so far: start plus scored trials, highest
// payoff, earliest on ties.
const Configuration& best_disclosed(const Observable& view, double* payoff_out = nullptr) {
  const Configuration* best = view.start_config;
  double best_payoff = view.start_payoff;
  for (const auto& tr : *view.history) {
    if (tr.payoff > best_payoff) {
      best = &tr.config;
      best_payoff = tr.payoff;
    }
  }
  if (payoff_out != nullptr) *payoff_out = best_payoff;
  return *best;
}

std::vector<int> seeded_permutation(int n, std::uint64_t seed) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = bounded_uint(rng, static_cast<std::uint64_t>(i) + 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

void check_view(const Observable& view) {
  if (view.start_config == nullptr || view.history == nullptr || view.n < 1) {
    throw ParameterError("observable view is incomplete");
  }
}

}  // namespace

RandomAgent::RandomAgent(AgentSpec spec) : spec_(std::move(spec)) { validate_agent_spec(spec_); }

Action RandomAgent::next_move(const Observable& view) {
  check_view(view);
  Rng rng(derive_seed(spec_.agent_seed, static_cast<std::uint64_t>(view.trials_done()) + 1));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(view.n));
  for (auto& b : bits) b = static_cast<std::uint8_t>(bounded_uint(rng, 2));
  return {Configuration(std::move(bits)), std::string()};
}

HillClimbAgent::HillClimbAgent(AgentSpec spec) : spec_(std::move(spec)) {
  validate_agent_spec(spec_);
}

Action HillClimbAgent::next_move(const Observable& view) {
  check_view(view);
  const int n = view.n;
  const std::vector<int> perm = seeded_permutation(n, spec_.agent_seed);

  // Replay the sweep over the disclosed history to find where it stands.
  Configuration base = *view.start_config;
  double base_payoff = view.start_payoff;
  int pos = 0;
  bool improved = false;
  bool stopped = false;
  for (const auto& tr : *view.history) {
    if (stopped) continue;
    if (tr.payoff > base_payoff) {
      base = tr.config;
      base_payoff = tr.payoff;
      improved = true;
    }
    ++pos;
    if (pos == n) {
      if (improved) {
        pos = 0;
        improved = false;
      } else {
        stopped = true;
      }
    }
  }

  if (stopped) return {base, std::string()};
  Configuration cand = base;
  cand.flip_bit(perm[static_cast<std::size_t>(pos)]);
  return {cand, std::string()};
}

LocalSearchAgent::LocalSearchAgent(AgentSpec spec) : spec_(std::move(spec)) {
  validate_agent_spec(spec_);
}

Action LocalSearchAgent::next_move(const Observable& view) {
  check_view(view);
  const int n = view.n;

  double best = view.start_payoff;
  int streak = 0;  // consecutive trials without a new best
  for (const auto& tr : *view.history) {
    if (tr.payoff > best) {
      best = tr.payoff;
      streak = 0;
    } else {
      ++streak;
    }
  }
  const bool stopped = spec_.params.patience > 0 && streak >= spec_.params.patience;
  if (stopped) return {best_disclosed(view), std::string()};

  const Configuration& base =
      view.history->empty() ? *view.start_config : view.history->back().config;
  Rng rng(derive_seed(spec_.agent_seed, static_cast<std::uint64_t>(view.trials_done()) + 1));

  int flips = 1;
  if (n >= 2 && next_double(rng) < spec_.params.p_longjump) {
    flips = 2 + static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(n - 1)));
  }
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Configuration cand = base;
  for (int f = 0; f < flips; ++f) {
    const auto pick = f + static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(n - f)));
    std::swap(idx[static_cast<std::size_t>(f)], idx[static_cast<std::size_t>(pick)]);
    cand.flip_bit(idx[static_cast<std::size_t>(f)]);
  }
  return {cand, std::string()};
}

ReplayAgent::ReplayAgent(AgentSpec spec, std::vector<Action> script)
    : spec_(std::move(spec)), script_(std::move(script)) {
  validate_agent_spec(spec_);
}

Action ReplayAgent::next_move(const Observable& view) {
  check_view(view);
  const auto t = static_cast<std::size_t>(view.trials_done());
  if (t >= script_.size()) {
    throw StateError("replay script exhausted after " + std::to_string(script_.size()) + " trials");
  }
  return script_[t];
}

LlmAgent::LlmAgent(AgentSpec spec, std::shared_ptr<Client> client, int n, int trials_total)
    : spec_(std::move(spec)), client_(std::move(client)), n_(n), trials_total_(trials_total) {
  validate_agent_spec(spec_);
  if (spec_.kind != "llm") throw ParameterError("LlmAgent needs an llm spec");
  if (!client_) throw ParameterError("LlmAgent needs a client");
  symbols_ = symbol_names(n_);
  instructions_ = render_instructions(spec_.params.framing, spec_.params.think_aloud,
                                      spec_.params.objective, n_, trials_total_);
  if (spec_.params.instructions_role == Role::system) {
    transcript_.push_back({Role::system, instructions_});
  }
  // With user-placed instructions the block is prepended to the first user
  // message instead, keeping the role alternation intact.
}

CompletionResult LlmAgent::exchange(const std::string& user_text, const std::string& purpose,
                                    int trial) {
  std::string content = user_text;
  if (spec_.params.instructions_role == Role::user && transcript_.empty()) {
    content = instructions_ + "\n\n" + user_text;
  }
  transcript_.push_back({Role::user, std::move(content)});
  const CompletionResult res = client_->complete(transcript_);
  transcript_.push_back({Role::assistant, res.text});
  prompt_tokens_ += res.usage.prompt_tokens;
  completion_tokens_ += res.usage.completion_tokens;
  if (logger_) {
    const std::vector<ChatMessage> appended(transcript_.end() - 2, transcript_.end());
    logger_(purpose, trial, appended, res);
  }
  return res;
}

ComprehensionResult LlmAgent::run_comprehension_test() {
  const auto quiz = comprehension_quiz(trials_total_);
  const CompletionResult res = exchange(render_quiz(trials_total_), "quiz", 0);

  ComprehensionResult out;
  out.raw_reply = res.text;
  out.answers.assign(quiz.size(), -1);

  std::istringstream lines(res.text);
  std::string line;
  while (std::getline(lines, line)) {
    std::size_t pos = 0;
    while (pos < line.size() && !std::isdigit(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos == line.size()) continue;
    std::size_t digits_end = pos;
    while (digits_end < line.size() && std::isdigit(static_cast<unsigned char>(line[digits_end])))
      ++digits_end;
    std::size_t q = 0;
    try {
      q = std::stoul(line.substr(pos, digits_end - pos));
    } catch (const std::exception&) {
      continue;
    }
    std::size_t lpos = digits_end;
    while (lpos < line.size() && !std::isalnum(static_cast<unsigned char>(line[lpos]))) ++lpos;
    if (lpos == line.size()) continue;
    const char c = line[lpos];
    const bool single = lpos + 1 == line.size() ||
                        !std::isalnum(static_cast<unsigned char>(line[lpos + 1]));
    if (!single || !std::isalpha(static_cast<unsigned char>(c))) continue;
    const int option = std::toupper(static_cast<unsigned char>(c)) - 'A';
    if (q >= 1 && q <= quiz.size() && option >= 0 && option < 26) {
      out.answers[q - 1] = option;
    }
  }

  out.passed = true;
  for (std::size_t i = 0; i < quiz.size(); ++i) {
    if (out.answers[i] != quiz[i].correct) out.passed = false;
  }
  return out;
}

Action LlmAgent::next_move(const Observable& view) {
  check_view(view);
  if (view.n != n_) throw ParameterError("observable width differs from the agent's");
  const int t = view.trials_done() + 1;

  std::ostringstream msg;
  if (view.history->empty()) {
    msg << "Your starting configuration is:\n"
        << render_config_lines(*view.start_config, symbols_) << "Its payoff is "
        << format_points(view.start_payoff)
        << " points. The starting payoff is informational and not counted.\n\n";
  } else {
    const auto& last = view.history->back();
    msg << "Trial " << last.trial << " result: your configuration earned "
        << format_points(last.payoff) << " points. ";
    if (spec_.params.objective == Objective::wealth) {
      msg << "Your wealth is now " << format_points(last.wealth) << " points.\n\n";
    } else {
      double best_payoff = 0.0;
      best_disclosed(view, &best_payoff);
      msg << "Your best payoff so far is " << format_points(best_payoff) << " points.\n\n";
    }
  }
  msg << "Trial " << t << " of " << trials_total_
      << ". Considering what you know so far, please submit your next trial configuration.";

  std::string user_text = msg.str();
  for (int attempt = 0;; ++attempt) {
    const CompletionResult res = exchange(user_text, attempt == 0 ? "trial" : "parse_retry", t);
    try {
      Configuration config = parse_configuration(res.text, symbols_);
      return {std::move(config), res.text};
    } catch (const ParseError& e) {
      if (attempt >= kParseRetries) throw;
      user_text = std::string("Your last answer could not be read (") + e.what() +
                  "). Please restate your final answer now, listing every symbol exactly once, "
                  "one per line, in the form \"name: on\" or \"name: off\".";
    }
  }
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, int n, int trials_total,
                                  std::shared_ptr<Client> client,
                                  std::vector<Action> replay_script) {
  validate_agent_spec(spec);
  if (spec.kind == "random") return std::make_unique<RandomAgent>(spec);
  if (spec.kind == "hill_climb") return std::make_unique<HillClimbAgent>(spec);
  if (spec.kind == "local_search") return std::make_unique<LocalSearchAgent>(spec);
  if (spec.kind == "replay") {
    if (replay_script.empty()) throw ParameterError("replay agent needs a script");
    return std::make_unique<ReplayAgent>(spec, std::move(replay_script));
  }
  if (!client) throw ParameterError("llm agent needs a client");
  return std::make_unique<LlmAgent>(spec, std::move(client), n, trials_total);
}

std::vector<AgentSpec> sample_population(const PopulationMix& mix, std::uint64_t master_seed) {
  if (mix.base_count < 1) throw ParameterError("population base count must be >= 1");
  validate_agent_spec(mix.base);
  for (const auto& extra : mix.extras) {
    validate_agent_spec(extra.spec);
    if (extra.fraction < 0.0) throw ParameterError("population fractions must be >= 0");
  }

  std::vector<AgentSpec> out;
  out.reserve(static_cast<std::size_t>(mix.base_count));
  for (int i = 0; i < mix.base_count; ++i) out.push_back(mix.base);
  for (const auto& extra : mix.extras) {
    const auto count = std::llround(extra.fraction * mix.base_count);
    for (long long i = 0; i < count; ++i) out.push_back(extra.spec);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].agent_seed = derive_seed(master_seed, static_cast<std::uint64_t>(i));
  }
  return out;
}

}  // namespace searchlab
