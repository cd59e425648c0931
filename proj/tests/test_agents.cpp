#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "searchlab/agents.h"
#include "searchlab/error.h"
#include "searchlab/fixtures.h"
#include "searchlab/game.h"
#include "searchlab/landscape.h"
#include "searchlab/llm_client.h"
#include "support/oracles.h"

using namespace searchlab;

namespace {

AgentSpec spec_of(const std::string& kind, std::uint64_t seed = 1) {
  AgentSpec s;
  s.kind = kind;
  if (kind == "llm") s.model_label = "test-model";
  s.agent_seed = seed;
  return s;
}

ProviderConfig scripted_config() {
  ProviderConfig c;
  c.kind = "scripted";
  return c;
}

ProviderConfig simulated_config(std::uint64_t seed) {
  ProviderConfig c;
  c.kind = "simulated";
  c.seed = seed;
  return c;
}

std::shared_ptr<Client> client_for(std::shared_ptr<Provider> provider, const ProviderConfig& cfg) {
  return std::make_shared<Client>(std::move(provider), cfg, [](double) {});
}

// Drives an agent against a landscape without the GameState wrapper so the
// start configuration can be forced.
struct Bench {
  const Landscape* land;
  Configuration start;
  double start_payoff;
  std::vector<TrialRecord> history;

  Bench(const Landscape& l, Configuration s)
      : land(&l), start(std::move(s)), start_payoff(l.payoff_points(start)) {}

  Observable view(int trials_total = 1000) const {
    Observable v;
    v.n = land->n();
    v.trials_total = trials_total;
    v.start_config = &start;
    v.start_payoff = start_payoff;
    v.history = &history;
    return v;
  }

  const TrialRecord& play(Agent& agent) {
    const Action act = agent.next_move(view());
    TrialRecord rec;
    rec.trial = static_cast<int>(history.size()) + 1;
    rec.config = act.config;
    rec.payoff = land->payoff_points(act.config);
    history.push_back(rec);
    return history.back();
  }
};

std::string valid_block(int n) {
  std::string out;
  const auto names = symbol_names(n);
  for (int i = 0; i < n; ++i) out += names[static_cast<std::size_t>(i)] + (i % 2 ? ": on\n" : ": off\n");
  return out;
}

}  // namespace

TEST_CASE("agent spec validation") {
  CHECK_NOTHROW(validate_agent_spec(spec_of("random")));
  CHECK_NOTHROW(validate_agent_spec(spec_of("llm")));
  CHECK_THROWS_AS(validate_agent_spec(spec_of("psychic")), ParameterError);

  AgentSpec no_label = spec_of("llm");
  no_label.model_label.clear();
  CHECK_THROWS_AS(validate_agent_spec(no_label), ParameterError);

  AgentSpec bad_jump = spec_of("local_search");
  bad_jump.params.p_longjump = 1.5;
  CHECK_THROWS_AS(validate_agent_spec(bad_jump), ParameterError);
  bad_jump.params.p_longjump = -0.1;
  CHECK_THROWS_AS(validate_agent_spec(bad_jump), ParameterError);

  AgentSpec bad_patience = spec_of("local_search");
  bad_patience.params.patience = -1;
  CHECK_THROWS_AS(validate_agent_spec(bad_patience), ParameterError);
}

TEST_CASE("agent spec json round trip") {
  AgentSpec s = spec_of("local_search", 99);
  s.params.p_longjump = 0.25;
  s.params.patience = 5;
  s.params.framing = Framing::nutrition;
  s.params.think_aloud = true;
  s.params.objective = Objective::peak;
  s.params.instructions_role = Role::user;

  const AgentSpec back = agent_spec_from_json(agent_spec_to_json(s));
  CHECK(back.kind == s.kind);
  CHECK(back.agent_seed == s.agent_seed);
  CHECK(back.params.p_longjump == s.params.p_longjump);
  CHECK(back.params.patience == s.params.patience);
  CHECK(back.params.framing == s.params.framing);
  CHECK(back.params.think_aloud == s.params.think_aloud);
  CHECK(back.params.objective == s.params.objective);
  CHECK(back.params.instructions_role == s.params.instructions_role);

  CHECK_THROWS_AS(agent_spec_from_json("nope"), FormatError);
  CHECK_THROWS_AS(agent_spec_from_json(R"({"kind":"llm"})"), ParameterError);  // label missing
}

TEST_CASE("population mixing realizes fractions by rounding") {
  PopulationMix mix;
  mix.base = spec_of("llm");
  mix.base_count = 69;
  mix.extras.push_back({spec_of("local_search"), 0.20});

  const auto specs = sample_population(mix, 7);
  REQUIRE(specs.size() == 83);  // 69 + round(0.20 * 69) = 69 + 14
  int llm = 0, local = 0;
  std::set<std::uint64_t> seeds;
  for (const auto& s : specs) {
    if (s.kind == "llm") ++llm;
    if (s.kind == "local_search") ++local;
    seeds.insert(s.agent_seed);
  }
  CHECK(llm == 69);
  CHECK(local == 14);
  CHECK(seeds.size() == specs.size());  // every agent draws a distinct stream

  // Same master seed, same seeds; the assignment is positional.
  const auto again = sample_population(mix, 7);
  for (std::size_t i = 0; i < specs.size(); ++i) CHECK(again[i].agent_seed == specs[i].agent_seed);

  PopulationMix none;
  none.base = spec_of("random");
  none.base_count = 3;
  CHECK(sample_population(none, 1).size() == 3);
  none.base_count = 0;
  CHECK_THROWS_AS(sample_population(none, 1), ParameterError);

  PopulationMix negative;
  negative.base = spec_of("random");
  negative.base_count = 5;
  negative.extras.push_back({spec_of("random"), -0.5});
  CHECK_THROWS_AS(sample_population(negative, 1), ParameterError);
}

TEST_CASE("random agent proposes well-formed deterministic moves") {
  const Landscape land = Landscape::generate(10, 2, 5);
  Bench a(land, Configuration::from_index(0, 10));
  Bench b(land, Configuration::from_index(0, 10));
  RandomAgent agent_a(spec_of("random", 11));
  RandomAgent agent_b(spec_of("random", 11));
  for (int t = 0; t < 10; ++t) {
    const auto& ra = a.play(agent_a);
    const auto& rb = b.play(agent_b);
    CHECK(ra.config.size() == 10);
    CHECK(ra.config == rb.config);
  }
}

TEST_CASE("hill climber reaches the single peak of a smooth landscape") {
  const Landscape land = Landscape::generate(10, 0, 31);
  const auto peak = land.enumerate_optima().global_optimum.first;

  for (std::uint32_t s : {0u, 1u, 513u, 1023u}) {
    Bench bench(land, Configuration::from_index(s, 10));
    HillClimbAgent agent(spec_of("hill_climb", 77));
    int improving = 0;
    double best = bench.start_payoff;
    bool reached = false;
    for (int t = 0; t < 200 && !reached; ++t) {
      const auto& rec = bench.play(agent);
      if (rec.payoff > best) {
        best = rec.payoff;
        ++improving;
      }
      reached = rec.payoff == 100.0;
    }
    CHECK(reached);
    CHECK(improving <= 10);
    CHECK(improving == oracle::hamming(Configuration::from_index(s, 10), peak));
  }
}

TEST_CASE("hill climber resubmits the best once no flip improves") {
  // On a k = 0 landscape, start at the peak: a full sweep finds nothing
  // better, after which every move repeats the peak (distance 0).
  const Landscape land = Landscape::generate(6, 0, 8);
  const auto peak = land.enumerate_optima().global_optimum.first;
  Bench bench(land, peak);
  HillClimbAgent agent(spec_of("hill_climb", 3));
  for (int t = 0; t < 6; ++t) bench.play(agent);  // the fruitless sweep
  for (int t = 0; t < 4; ++t) {
    const auto& rec = bench.play(agent);
    CHECK(rec.config == peak);
  }
}

TEST_CASE("local search stops after `patience` non-improving trials") {
  const Landscape land = Landscape::generate(8, 0, 21);
  const auto peak = land.enumerate_optima().global_optimum.first;

  AgentSpec s = spec_of("local_search", 5);
  s.params.p_longjump = 0.0;
  s.params.patience = 3;
  LocalSearchAgent agent(s);

  // Start at the peak: nothing improves, so after 3 trials the agent must
  // resubmit the best disclosed configuration (the peak) forever.
  Bench bench(land, peak);
  {
    const auto& rec = bench.play(agent);
    CHECK(rec.config != peak);  // first probe flips one bit of the start
  }
  for (int t = 0; t < 2; ++t) bench.play(agent);  // later probes may wander anywhere
  for (int t = 0; t < 5; ++t) {
    const auto& rec = bench.play(agent);
    CHECK(rec.config == peak);  // cashed in
  }
}

TEST_CASE("local search with patience 0 never stops and jumps at the configured rate") {
  const Landscape land = Landscape::generate(10, 0, 2);
  const auto peak = land.enumerate_optima().global_optimum.first;

  AgentSpec s = spec_of("local_search", 1234);
  s.params.p_longjump = 0.2;
  s.params.patience = 0;
  LocalSearchAgent agent(s);

  Bench bench(land, peak);
  const int trials = 4000;
  int jumps = 0;
  Configuration prev = peak;
  for (int t = 0; t < trials; ++t) {
    const auto& rec = bench.play(agent);
    const int moved = oracle::hamming(rec.config, prev);
    CHECK(moved >= 1);  // never a resubmission
    if (moved > 1) ++jumps;
    prev = rec.config;
  }
  // Binomial(4000, 0.2): mean 800, sd ~25.3; stay within 3 sigma.
  const double sd = std::sqrt(trials * 0.2 * 0.8);
  CHECK(std::abs(jumps - trials * 0.2) <= 3.0 * sd);

  // Jump sizes span 2..n bits.
  AgentSpec all_jump = spec_of("local_search", 9);
  all_jump.params.p_longjump = 1.0;
  all_jump.params.patience = 0;
  LocalSearchAgent jumper(all_jump);
  Bench jb(land, peak);
  std::set<int> sizes;
  Configuration base = peak;
  for (int t = 0; t < 300; ++t) {
    const auto& rec = jb.play(jumper);
    sizes.insert(oracle::hamming(rec.config, base));
    base = rec.config;
  }
  CHECK(*sizes.begin() >= 2);
  CHECK(*sizes.rbegin() <= 10);
  CHECK(sizes.size() > 3);
}

TEST_CASE("replay agent returns its script then runs dry") {
  std::vector<Action> script = {{Configuration::from_string("1010"), "move one"},
                                {Configuration::from_string("0101"), "move two"}};
  ReplayAgent agent(spec_of("replay"), script);
  const Landscape land = Landscape::generate(4, 0, 1);
  Bench bench(land, Configuration::from_string("0000"));
  CHECK(agent.next_move(bench.view()).config.to_string() == "1010");
  bench.play(agent);
  CHECK(agent.next_move(bench.view()).config.to_string() == "0101");
  bench.play(agent);
  CHECK_THROWS_AS(agent.next_move(bench.view()), StateError);
}

TEST_CASE("make_agent wires dependencies and rejects missing ones") {
  CHECK(make_agent(spec_of("random"), 10, 24)->spec().kind == "random");
  CHECK_THROWS_AS(make_agent(spec_of("llm"), 10, 24), ParameterError);       // no client
  CHECK_THROWS_AS(make_agent(spec_of("replay"), 10, 24), ParameterError);   // no script

  auto client = client_for(std::make_shared<SimulatedMockProvider>(1, 10), simulated_config(1));
  CHECK(make_agent(spec_of("llm"), 10, 24, client)->spec().kind == "llm");
}

TEST_CASE("llm agent passes the comprehension quiz through a simulated model") {
  auto client = client_for(std::make_shared<SimulatedMockProvider>(42, 10), simulated_config(42));
  AgentSpec s = spec_of("llm", 42);
  LlmAgent agent(s, client, 10, 24);
  const ComprehensionResult res = agent.run_comprehension_test();
  CHECK(res.passed);
  const auto quiz = comprehension_quiz(24);
  REQUIRE(res.answers.size() == quiz.size());
  for (std::size_t i = 0; i < quiz.size(); ++i) CHECK(res.answers[i] == quiz[i].correct);
  // The quiz exchange stays in the transcript.
  CHECK(agent.transcript().size() == 3);  // system, quiz, reply
}

TEST_CASE("llm agent submits parseable moves and keeps one growing transcript") {
  const Landscape land = Landscape::generate(10, 5, 77);
  GameState game(land, 7, 24);
  auto client = client_for(std::make_shared<SimulatedMockProvider>(7, 10), simulated_config(7));
  AgentSpec s = spec_of("llm", 7);
  s.params.think_aloud = true;
  LlmAgent agent(s, client, 10, 24);

  for (int t = 1; t <= 5; ++t) {
    const Action act = agent.next_move(observe(game));
    CHECK(act.config.size() == 10);
    CHECK_FALSE(act.raw_text.empty());
    game.submit(act.config, act.raw_text);
  }
  // system + 5 * (user prompt, assistant reply)
  CHECK(agent.transcript().size() == 11);

  // The standing trial request is pinned verbatim.
  const std::string& first_prompt = agent.transcript()[1].content;
  CHECK(first_prompt.find("Trial 1 of 24. Considering what you know so far, please submit your "
                          "next trial configuration.") != std::string::npos);
  // Later prompts echo the feedback numbers.
  const std::string& second_prompt = agent.transcript()[3].content;
  CHECK(second_prompt.find("Trial 1 result") != std::string::npos);
  CHECK(second_prompt.find("wealth") != std::string::npos);
}

TEST_CASE("user-role instructions fold into the first message") {
  auto client = client_for(std::make_shared<SimulatedMockProvider>(3, 10), simulated_config(3));
  AgentSpec s = spec_of("llm", 3);
  s.params.instructions_role = Role::user;
  LlmAgent agent(s, client, 10, 24);
  const Landscape land = Landscape::generate(10, 0, 3);
  GameState game(land, 3, 24);
  agent.next_move(observe(game));
  REQUIRE_FALSE(agent.transcript().empty());
  CHECK(agent.transcript()[0].role == Role::user);
  CHECK(agent.transcript()[0].content.find(agent.instructions_text()) == 0);
  CHECK(agent.transcript()[0].content.find("Trial 1 of 24") != std::string::npos);
}

TEST_CASE("llm agent re-prompts on parse failures, then aborts") {
  const Landscape land = Landscape::generate(10, 0, 13);
  GameState game(land, 5, 24);
  AgentSpec s = spec_of("llm", 5);

  // Two bad replies, then a good one: recovered.
  {
    auto mock = std::make_shared<ScriptedMockProvider>();
    mock->push_response("hmm");
    mock->push_response("still thinking");
    mock->push_response(valid_block(10));
    auto client = client_for(mock, scripted_config());
    LlmAgent agent(s, client, 10, 24);

    std::vector<std::string> purposes;
    agent.set_call_logger([&](const std::string& purpose, int trial,
                              const std::vector<ChatMessage>& appended, const CompletionResult&) {
      purposes.push_back(purpose);
      CHECK(trial == 1);
      CHECK(appended.size() == 2);
    });

    const Action act = agent.next_move(observe(game));
    CHECK(act.raw_text == valid_block(10));
    CHECK(purposes == std::vector<std::string>{"trial", "parse_retry", "parse_retry"});
    // The retry prompt restates the answer contract.
    bool found_reminder = false;
    for (const auto& m : agent.transcript()) {
      if (m.role == Role::user && m.content.find("could not be read") != std::string::npos) {
        found_reminder = true;
      }
    }
    CHECK(found_reminder);
  }

  // Four bad replies exhaust the initial attempt plus three re-prompts.
  {
    auto mock = std::make_shared<ScriptedMockProvider>();
    for (int i = 0; i < 4; ++i) mock->push_response("no block here");
    mock->push_response(valid_block(10));  // never reached
    auto client = client_for(mock, scripted_config());
    LlmAgent agent(s, client, 10, 24);
    CHECK_THROWS_AS(agent.next_move(observe(game)), ParseError);
    CHECK(mock->steps_remaining() == 1);
  }
}

TEST_CASE("llm agent surfaces provider failures") {
  const Landscape land = Landscape::generate(10, 0, 13);
  GameState game(land, 5, 24);
  auto mock = std::make_shared<ScriptedMockProvider>();
  mock->push_failure("service unavailable");
  ProviderConfig cfg = scripted_config();
  cfg.retries = 0;
  auto client = client_for(mock, cfg);
  LlmAgent agent(spec_of("llm", 5), client, 10, 24);
  CHECK_THROWS_AS(agent.next_move(observe(game)), ProviderError);
}

TEST_CASE("usage accumulates across exchanges") {
  auto client = client_for(std::make_shared<SimulatedMockProvider>(21, 10), simulated_config(21));
  AgentSpec s = spec_of("llm", 21);
  LlmAgent agent(s, client, 10, 24);
  const Landscape land = Landscape::generate(10, 0, 21);
  GameState game(land, 21, 24);
  agent.next_move(observe(game));
  const auto after_one = agent.prompt_tokens();
  game.submit(parse_configuration(agent.transcript().back().content, symbol_names(10)));
  agent.next_move(observe(game));
  CHECK(agent.prompt_tokens() > after_one);
  CHECK(agent.completion_tokens() > 0);
}
