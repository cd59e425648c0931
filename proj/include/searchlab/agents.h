#ifndef SEARCHLAB_AGENTS_H
#define SEARCHLAB_AGENTS_H

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "searchlab/configuration.h"
#include "searchlab/fixtures.h"
#include "searchlab/game.h"
#include "searchlab/llm_client.h"

namespace searchlab {

struct AgentParams {
  double p_longjump = 0.1;  // local_search: chance of a multi-bit jump
  int patience = 3;         // local_search: non-improving trials before stopping; 0 = never
  Framing framing = Framing::alien;
  bool think_aloud = false;
  Objective objective = Objective::wealth;
  Role instructions_role = Role::system;  // where the instruction block is placed
  std::string replay_source;              // replay: "<store path>#<run id>", informational
};

struct AgentSpec {
  std::string kind = "llm";  // llm | local_search | hill_climb | random | replay
  std::string model_label;   // provider key for llm, empty for scripted kinds
  AgentParams params;
  std::uint64_t agent_seed = 0;
};

// Throws ParameterError when a field is out of range for the kind.
void validate_agent_spec(const AgentSpec& spec);

std::string agent_spec_to_json(const AgentSpec& spec);
AgentSpec agent_spec_from_json(const std::string& json_text);

struct PopulationMix {
  AgentSpec base;
  int base_count = 0;
  struct Extra {
    AgentSpec spec;
    double fraction = 0.0;  // of base_count, realized as round(fraction * base_count)
  };
  std::vector<Extra> extras;
};

// Everything an agent is allowed to see: the disclosed start, all prior
// trials, and how much of the game is left. Never the landscape itself.
struct Observable {
  int n = 0;
  int trials_total = 0;
  const Configuration* start_config = nullptr;
  double start_payoff = 0.0;
  const std::vector<TrialRecord>* history = nullptr;

  int trials_done() const { return static_cast<int>(history->size()); }
  int trials_remaining() const { return trials_total - trials_done(); }
};

Observable observe(const GameState& game);

struct Action {
  Configuration config;
  std::string raw_text;  // full model output; empty for scripted agents
};

struct ComprehensionResult {
  bool passed = false;
  std::vector<int> answers;  // chosen option index per question, -1 when unanswered
  std::string raw_reply;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual Action next_move(const Observable& view) = 0;
  virtual const AgentSpec& spec() const = 0;
};

// Uniform random configuration each trial.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(AgentSpec spec);
  Action next_move(const Observable& view) override;
  const AgentSpec& spec() const override { return spec_; }

 private:
  AgentSpec spec_;
};

// Steepest-free single-flip climber: sweeps positions in a seeded order over
// the running best, keeps improvements, starts a fresh sweep after an
// improving pass, and resubmits the best once a full pass yields nothing.
// The move is a pure function of (seed, observable history).
class HillClimbAgent : public Agent {
 public:
  explicit HillClimbAgent(AgentSpec spec);
  Action next_move(const Observable& view) override;
  const AgentSpec& spec() const override { return spec_; }

 private:
  AgentSpec spec_;
};

// Single-flip moves from the previous submission, with probability p_longjump
// of flipping 2..n bits at once; stops (resubmits the best so far) after
// `patience` consecutive non-improving trials. Pure in (seed, observable).
class LocalSearchAgent : public Agent {
 public:
  explicit LocalSearchAgent(AgentSpec spec);
  Action next_move(const Observable& view) override;
  const AgentSpec& spec() const override { return spec_; }

 private:
  AgentSpec spec_;
};

// Replays a fixed script of actions, one per trial.
class ReplayAgent : public Agent {
 public:
  ReplayAgent(AgentSpec spec, std::vector<Action> script);
  Action next_move(const Observable& view) override;
  const AgentSpec& spec() const override { return spec_; }

 private:
  AgentSpec spec_;
  std::vector<Action> script_;
};

// Drives a chat model through the game protocol with a persistent transcript:
// instructions, optional comprehension test, then one feedback+prompt round
// per trial. Unparseable answers are re-prompted with a format reminder up to
// kParseRetries times before the ParseError escapes to the run loop.
class LlmAgent : public Agent {
 public:
  static constexpr int kParseRetries = 3;

  // Invoked once per completed model exchange so callers can journal it.
  // purpose is "quiz", "trial", or "parse_retry"; trial is 0 for the quiz.
  using CallLogger = std::function<void(const std::string& purpose, int trial,
                                        const std::vector<ChatMessage>& messages_appended,
                                        const CompletionResult& result)>;

  LlmAgent(AgentSpec spec, std::shared_ptr<Client> client, int n, int trials_total);

  void set_call_logger(CallLogger logger) { logger_ = std::move(logger); }

  // Presents the bundled quiz; pass requires every answer correct. The
  // exchange stays in the transcript, as does everything else.
  ComprehensionResult run_comprehension_test();

  Action next_move(const Observable& view) override;
  const AgentSpec& spec() const override { return spec_; }

  const std::vector<ChatMessage>& transcript() const { return transcript_; }
  const std::string& instructions_text() const { return instructions_; }
  std::int64_t prompt_tokens() const { return prompt_tokens_; }
  std::int64_t completion_tokens() const { return completion_tokens_; }

 private:
  CompletionResult exchange(const std::string& user_text, const std::string& purpose, int trial);

  AgentSpec spec_;
  std::shared_ptr<Client> client_;
  int n_ = 0;
  int trials_total_ = 0;
  std::vector<std::string> symbols_;
  std::string instructions_;
  std::vector<ChatMessage> transcript_;
  std::int64_t prompt_tokens_ = 0;
  std::int64_t completion_tokens_ = 0;
  CallLogger logger_;
};

// Builds an agent for the spec. LLM specs need a client; replay specs need a
// script. Missing dependencies throw ParameterError.
std::unique_ptr<Agent> make_agent(const AgentSpec& spec, int n, int trials_total,
                                  std::shared_ptr<Client> client = nullptr,
                                  std::vector<Action> replay_script = {});

// Expands a mix into concrete specs: base_count copies of the base template,
// then round(fraction * base_count) copies per extra, with per-agent seeds
// derived from master_seed by position.
std::vector<AgentSpec> sample_population(const PopulationMix& mix, std::uint64_t master_seed);

}  // namespace searchlab

#endif  // SEARCHLAB_AGENTS_H
