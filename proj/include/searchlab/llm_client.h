#ifndef SEARCHLAB_LLM_CLIENT_H
#define SEARCHLAB_LLM_CLIENT_H

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "searchlab/configuration.h"
#include "searchlab/fixtures.h"
#include "searchlab/rng.h"
#include "searchlab/text.h"

namespace searchlab {

enum class Role { system, user, assistant };

std::string to_string(Role role);
Role role_from_string(const std::string& s);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct CompletionResult {
  std::string text;
  Usage usage;
  int retries_used = 0;   // provider-level retries spent by the client
  double latency_s = 0.0; // wall time of the successful round trip
};

struct ProviderConfig {
  std::string kind = "simulated";  // "openai" | "scripted" | "simulated"
  std::string endpoint;            // http(s)://host[:port]/path, chat-completions shape
  std::string model;
  std::optional<double> temperature;  // absent: provider default
  std::optional<int> max_tokens;
  int retries = 3;                 // extra attempts after a failed call
  double backoff_initial_s = 1.0;  // sleep before retry r is initial * factor^(r-1)
  double backoff_factor = 2.0;
  int timeout_s = 120;
  int max_concurrency = 4;
  std::string credential_env = "OPENAI_API_KEY";
  std::uint64_t seed = 0;  // mocks only
};

ProviderConfig provider_config_from_json(const std::string& json_text);

// One chat-completion round trip. Implementations throw ProviderError on
// failure; ContextOverflowError is never worth retrying.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual CompletionResult complete(const std::vector<ChatMessage>& messages) = 0;
  virtual std::string describe() const = 0;
};

// Talks to an OpenAI-style chat-completions endpoint over HTTP(S). The API
// key is read from the environment at call time and never stored or echoed
// into errors.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig config);
  CompletionResult complete(const std::vector<ChatMessage>& messages) override;
  std::string describe() const override;

 private:
  ProviderConfig config_;
  std::string scheme_, host_, path_;
  int port_ = 0;
};

// Test double fed from a fixed queue. Each step is either a canned reply or
// an injected failure.
class ScriptedMockProvider : public Provider {
 public:
  void push_response(std::string text);
  void push_failure(std::string message, bool context_overflow = false);

  CompletionResult complete(const std::vector<ChatMessage>& messages) override;
  std::string describe() const override;

  std::size_t steps_remaining() const;
  const std::vector<std::vector<ChatMessage>>& calls() const { return calls_; }

 private:
  struct Step {
    bool fail = false;
    bool context_overflow = false;
    std::string text;
  };
  std::vector<Step> queue_;
  std::size_t next_ = 0;
  std::vector<std::vector<ChatMessage>> calls_;
};

// Deterministic stand-in for a live model: answers the comprehension test
// from the instruction text, then plays a noisy local search over its own
// previous answers, with short think-aloud passages. Good enough to drive
// every downstream stage end to end.
class SimulatedMockProvider : public Provider {
 public:
  SimulatedMockProvider(std::uint64_t seed, int n = 10);
  CompletionResult complete(const std::vector<ChatMessage>& messages) override;
  std::string describe() const override;

 private:
  Rng rng_;
  int n_;
  int turn_ = 0;
  std::vector<std::uint8_t> last_bits_;
};

std::shared_ptr<Provider> make_provider(const ProviderConfig& config);

// Serializes provider access (bounded concurrency) and retries failed calls
// with exponential backoff. Sleeping is injectable for tests.
class Client {
 public:
  using SleepFn = std::function<void(double seconds)>;

  Client(std::shared_ptr<Provider> provider, const ProviderConfig& config,
         SleepFn sleep = SleepFn());

  // Retries ProviderError up to config.retries times; rethrows after that.
  // ContextOverflowError aborts immediately.
  CompletionResult complete(const std::vector<ChatMessage>& messages);

  const Provider& provider() const { return *provider_; }

 private:
  std::shared_ptr<Provider> provider_;
  ProviderConfig config_;
  SleepFn sleep_;
  struct Gate;
  std::shared_ptr<Gate> gate_;
};

// Extracts a full configuration from free-form reply text. The answer is the
// last blank-line-delimited block whose recognizable "symbol: state" pairs
// cover at least half the symbols; inside it every symbol must appear exactly
// once. Throws ParseError otherwise.
Configuration parse_configuration(const std::string& text,
                                  const std::vector<std::string>& symbol_names);

// Byte span of the block parse_configuration would read, when one exists.
std::optional<Span> find_answer_block(const std::string& text,
                                      const std::vector<std::string>& symbol_names);

struct LabeledSpan {
  Span span;
  std::string label;
};

// Splits the text into sentences, sends them numbered under the rubric's
// reply contract ("<number>: <label>"), and maps the labels back onto the
// sentence spans. Empty text returns no spans without touching the provider.
// Throws ClassifierFormatError when the reply does not cover every sentence
// with a known label.
std::vector<LabeledSpan> classify_label(Client& client, const Rubric& rubric,
                                        const std::string& text);

}  // namespace searchlab

#endif  // SEARCHLAB_LLM_CLIENT_H
