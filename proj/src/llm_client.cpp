#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "searchlab/llm_client.h"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "searchlab/error.h"
#include "searchlab/text.h"

namespace searchlab {

using nlohmann::json;

std::string to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw ParameterError("unknown chat role '" + s + "'");
}

ProviderConfig provider_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("provider config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("provider config must be a JSON object");

  ProviderConfig c;
  try {
    if (j.contains("kind")) c.kind = j.at("kind").get<std::string>();
    if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model")) c.model = j.at("model").get<std::string>();
    if (j.contains("temperature") && !j.at("temperature").is_null())
      c.temperature = j.at("temperature").get<double>();
    if (j.contains("max_tokens") && !j.at("max_tokens").is_null())
      c.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("retries")) c.retries = j.at("retries").get<int>();
    if (j.contains("backoff_initial_s")) c.backoff_initial_s = j.at("backoff_initial_s").get<double>();
    if (j.contains("backoff_factor")) c.backoff_factor = j.at("backoff_factor").get<double>();
    if (j.contains("timeout_s")) c.timeout_s = j.at("timeout_s").get<int>();
    if (j.contains("max_concurrency")) c.max_concurrency = j.at("max_concurrency").get<int>();
    if (j.contains("credential_env")) c.credential_env = j.at("credential_env").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("provider config field has the wrong type: ") + e.what());
  }

  if (c.kind != "openai" && c.kind != "scripted" && c.kind != "simulated") {
    throw ConfigError("provider kind must be openai, scripted, or simulated; got '" + c.kind + "'");
  }
  if (c.kind == "openai" && c.endpoint.empty()) {
    throw ConfigError("openai provider requires an endpoint");
  }
  if (c.temperature && (*c.temperature < 0.0 || *c.temperature > 2.0)) {
    throw ConfigError("temperature must lie in [0, 2]");
  }
  if (c.max_tokens && *c.max_tokens < 1) throw ConfigError("max_tokens must be positive");
  if (c.retries < 0) throw ConfigError("retries must be >= 0");
  if (c.backoff_initial_s < 0.0 || c.backoff_factor < 1.0) {
    throw ConfigError("backoff requires initial >= 0 and factor >= 1");
  }
  if (c.timeout_s < 1) throw ConfigError("timeout_s must be positive");
  if (c.max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
  return c;
}

namespace {

// True when a failing provider reply indicates the prompt no longer fits the
// model's context window.
bool looks_like_context_overflow(const std::string& body) {
  const std::string lowered = to_lower_ascii(body);
  return lowered.find("context_length_exceeded") != std::string::npos ||
         lowered.find("context length") != std::string::npos ||
         lowered.find("maximum context") != std::string::npos;
}

std::string truncate_for_error(const std::string& body) {
  constexpr std::size_t kMax = 240;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax) + "...";
}

}  // namespace

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must start with http:// or https://");
  scheme_ = url.substr(0, scheme_end);
  if (scheme_ != "http" && scheme_ != "https") {
    throw ConfigError("endpoint scheme must be http or https, got '" + scheme_ + "'");
  }
  const auto rest = url.substr(scheme_end + 3);
  const auto slash = rest.find('/');
  std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
  path_ = slash == std::string::npos ? std::string("/v1/chat/completions") : rest.substr(slash);
  const auto colon = authority.find(':');
  if (colon == std::string::npos) {
    host_ = authority;
    port_ = scheme_ == "https" ? 443 : 80;
  } else {
    host_ = authority.substr(0, colon);
    try {
      port_ = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("endpoint port is not a number");
    }
  }
  if (host_.empty()) throw ConfigError("endpoint host is empty");
}

CompletionResult HttpProvider::complete(const std::vector<ChatMessage>& messages) {
  json body;
  body["model"] = config_.model;
  body["messages"] = json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  if (config_.temperature) body["temperature"] = *config_.temperature;
  if (config_.max_tokens) body["max_tokens"] = *config_.max_tokens;

  httplib::Headers headers;
  const char* key = std::getenv(config_.credential_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("credential environment variable " + config_.credential_env + " is not set");
  }
  headers.emplace("Authorization", std::string("Bearer ") + key);

  auto run = [&](auto& client) -> httplib::Result {
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    client.set_write_timeout(config_.timeout_s, 0);
    return client.Post(path_, headers, body.dump(), "application/json");
  };

  httplib::Result res = [&] {
    if (scheme_ == "https") {
      httplib::SSLClient client(host_, port_);
      return run(client);
    }
    httplib::Client client(host_, port_);
    return run(client);
  }();

  if (!res) {
    throw ProviderError("transport failure talking to " + host_ + ": " +
                        httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    if (looks_like_context_overflow(res->body)) {
      throw ContextOverflowError("provider reports the context window is exhausted (HTTP " +
                                 std::to_string(res->status) + ")");
    }
    throw ProviderError("HTTP " + std::to_string(res->status) + " from " + host_ + ": " +
                        truncate_for_error(res->body));
  }

  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProviderError(std::string("provider reply is not valid JSON: ") + e.what());
  }
  CompletionResult out;
  try {
    out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw ProviderError("provider reply lacks choices[0].message.content");
  }
  if (reply.contains("usage") && reply["usage"].is_object()) {
    const auto& u = reply["usage"];
    if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number())
      out.usage.prompt_tokens = u["prompt_tokens"].get<std::int64_t>();
    if (u.contains("completion_tokens") && u["completion_tokens"].is_number())
      out.usage.completion_tokens = u["completion_tokens"].get<std::int64_t>();
  }
  return out;
}

std::string HttpProvider::describe() const {
  return "openai(" + config_.model + " @ " + scheme_ + "://" + host_ + ":" + std::to_string(port_) +
         path_ + ")";
}

void ScriptedMockProvider::push_response(std::string text) {
  queue_.push_back({false, false, std::move(text)});
}

void ScriptedMockProvider::push_failure(std::string message, bool context_overflow) {
  queue_.push_back({true, context_overflow, std::move(message)});
}

CompletionResult ScriptedMockProvider::complete(const std::vector<ChatMessage>& messages) {
  calls_.push_back(messages);
  if (next_ >= queue_.size()) throw ProviderError("scripted provider: no steps left");
  const Step step = queue_[next_++];
  if (step.fail) {
    if (step.context_overflow) throw ContextOverflowError(step.text);
    throw ProviderError(step.text);
  }
  CompletionResult out;
  out.text = step.text;
  return out;
}

std::string ScriptedMockProvider::describe() const { return "scripted"; }

std::size_t ScriptedMockProvider::steps_remaining() const { return queue_.size() - next_; }

SimulatedMockProvider::SimulatedMockProvider(std::uint64_t seed, int n) : rng_(seed), n_(n) {
  if (n_ < 1) throw ParameterError("simulated provider needs n >= 1");
}

CompletionResult SimulatedMockProvider::complete(const std::vector<ChatMessage>& messages) {
  std::string last_user;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::user) {
      last_user = it->content;
      break;
    }
  }

  CompletionResult out;
  if (last_user.find("comprehension test") != std::string::npos) {
    std::ostringstream reply;
    const auto quiz = comprehension_quiz();
    for (std::size_t q = 0; q < quiz.size(); ++q) {
      reply << (q + 1) << ": " << static_cast<char>('A' + quiz[q].correct) << "\n";
    }
    out.text = reply.str();
    out.usage.prompt_tokens = static_cast<std::int64_t>(last_user.size() / 4);
    out.usage.completion_tokens = static_cast<std::int64_t>(out.text.size() / 4);
    return out;
  }

  const auto names = symbol_names(n_);
  if (last_bits_.empty()) {
    last_bits_.resize(static_cast<std::size_t>(n_));
    for (auto& b : last_bits_) b = static_cast<std::uint8_t>(bounded_uint(rng_, 2));
  } else {
    // Move less and less as the run progresses; late turns mostly resubmit.
    const double p_repeat = std::min(0.9, 0.08 * turn_);
    if (next_double(rng_) >= p_repeat) {
      const int flips = 1 + (bounded_uint(rng_, 4) == 0 ? 1 : 0);
      std::vector<int> idx(static_cast<std::size_t>(n_));
      for (int i = 0; i < n_; ++i) idx[static_cast<std::size_t>(i)] = i;
      for (int f = 0; f < flips; ++f) {
        const auto pick = f + static_cast<int>(bounded_uint(rng_, static_cast<std::uint64_t>(n_ - f)));
        std::swap(idx[static_cast<std::size_t>(f)], idx[static_cast<std::size_t>(pick)]);
        last_bits_[static_cast<std::size_t>(idx[static_cast<std::size_t>(f)])] ^= 1u;
      }
    }
  }

  std::ostringstream reply;
  if (turn_ > 0 && next_double(rng_) < 0.7) {
    static const char* backward_pool[] = {
        "The last flip dropped my payoff a little.",
        "So far the best result came from an earlier round.",
        "My previous submission scored about the same as before.",
    };
    reply << backward_pool[bounded_uint(rng_, 3)] << " ";
  }
  {
    static const char* forward_pool[] = {
        "Next I will adjust one setting and see what happens.",
        "My plan is to try a small change this time.",
        "Maybe I should explore a different corner of the space.",
    };
    reply << forward_pool[bounded_uint(rng_, 3)] << " ";
  }
  {
    const int mentions = 1 + static_cast<int>(bounded_uint(rng_, 4));
    std::vector<int> idx(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) idx[static_cast<std::size_t>(i)] = i;
    reply << "I am focusing on ";
    for (int m = 0; m < mentions && m < n_; ++m) {
      const auto pick = m + static_cast<int>(bounded_uint(rng_, static_cast<std::uint64_t>(n_ - m)));
      std::swap(idx[static_cast<std::size_t>(m)], idx[static_cast<std::size_t>(pick)]);
      if (m > 0) reply << " and ";
      reply << names[static_cast<std::size_t>(idx[static_cast<std::size_t>(m)])];
    }
    reply << ".\n\n";
  }
  for (int i = 0; i < n_; ++i) {
    reply << names[static_cast<std::size_t>(i)] << ": "
          << (last_bits_[static_cast<std::size_t>(i)] ? "on" : "off") << "\n";
  }
  ++turn_;

  out.text = reply.str();
  out.usage.prompt_tokens = static_cast<std::int64_t>(last_user.size() / 4);
  out.usage.completion_tokens = static_cast<std::int64_t>(out.text.size() / 4);
  return out;
}

std::string SimulatedMockProvider::describe() const { return "simulated"; }

std::shared_ptr<Provider> make_provider(const ProviderConfig& config) {
  if (config.kind == "openai") return std::make_shared<HttpProvider>(config);
  if (config.kind == "scripted") return std::make_shared<ScriptedMockProvider>();
  if (config.kind == "simulated") return std::make_shared<SimulatedMockProvider>(config.seed);
  throw ConfigError("provider kind must be openai, scripted, or simulated; got '" + config.kind + "'");
}

struct Client::Gate {
  std::mutex m;
  std::condition_variable cv;
  int available = 0;
};

Client::Client(std::shared_ptr<Provider> provider, const ProviderConfig& config, SleepFn sleep)
    : provider_(std::move(provider)), config_(config), sleep_(std::move(sleep)),
      gate_(std::make_shared<Gate>()) {
  if (!provider_) throw ParameterError("client needs a provider");
  gate_->available = config_.max_concurrency;
  if (!sleep_) {
    sleep_ = [](double seconds) {
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    };
  }
}

namespace {

// Transcript shape: optional system block, then strictly alternating
// user/assistant turns, ending on the user turn being answered.
void check_transcript(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw ParameterError("transcript is empty");
  std::size_t i = 0;
  while (i < messages.size() && messages[i].role == Role::system) ++i;
  Role expect = Role::user;
  for (; i < messages.size(); ++i) {
    if (messages[i].role != expect) {
      throw ParameterError("transcript roles must alternate user/assistant after the system block");
    }
    expect = expect == Role::user ? Role::assistant : Role::user;
  }
  if (expect != Role::assistant) {
    throw ParameterError("transcript must end with a user message");
  }
  for (const auto& m : messages) {
    if (m.content.empty()) throw ParameterError("transcript contains an empty message");
  }
}

}  // namespace

CompletionResult Client::complete(const std::vector<ChatMessage>& messages) {
  check_transcript(messages);
  {
    std::unique_lock lock(gate_->m);
    gate_->cv.wait(lock, [&] { return gate_->available > 0; });
    --gate_->available;
  }
  struct Release {
    std::shared_ptr<Gate> g;
    ~Release() {
      std::lock_guard lock(g->m);
      ++g->available;
      g->cv.notify_one();
    }
  } release{gate_};

  for (int attempt = 0;; ++attempt) {
    try {
      const auto begin = std::chrono::steady_clock::now();
      CompletionResult out = provider_->complete(messages);
      const auto end = std::chrono::steady_clock::now();
      out.retries_used = attempt;
      out.latency_s = std::chrono::duration<double>(end - begin).count();
      return out;
    } catch (const ContextOverflowError&) {
      throw;
    } catch (const ProviderError&) {
      if (attempt >= config_.retries) throw;
      sleep_(config_.backoff_initial_s * std::pow(config_.backoff_factor, attempt));
    }
  }
}

}  // namespace searchlab
