#include <algorithm>
#include <cctype>
#include <sstream>

#include "searchlab/error.h"
#include "searchlab/llm_client.h"
#include "searchlab/text.h"

namespace searchlab {

namespace {

bool word_byte(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Whole-word match of `word` (pre-lowered) at byte `pos` of `lowered`.
bool word_at(const std::string& lowered, std::size_t pos, const std::string& word) {
  if (pos + word.size() > lowered.size()) return false;
  if (lowered.compare(pos, word.size(), word) != 0) return false;
  if (pos > 0 && word_byte(lowered[pos - 1])) return false;
  const std::size_t end = pos + word.size();
  if (end < lowered.size() && word_byte(lowered[end])) return false;
  return true;
}

struct Pair {
  std::size_t symbol = 0;  // index into symbol_names
  std::uint8_t value = 0;
  std::size_t begin = 0;  // byte span in the full reply text
  std::size_t end = 0;
};

constexpr std::size_t kMaxFillerBytes = 32;

const char* kFillerWords[] = {"is",       "are", "to",  "set",   "stays", "remains",
                              "switched", "turned", "now", "state", "level"};

// Consumes separators and connective words between a symbol name and its
// state token. Returns the position where a state token may start, or npos
// when the gap is not pure filler or exceeds the byte budget.
std::size_t skip_filler(const std::string& lowered, std::size_t pos, std::size_t block_end) {
  std::size_t used = 0;
  while (pos < block_end && used <= kMaxFillerBytes) {
    const char c = lowered[pos];
    if (!word_byte(c)) {
      ++pos;
      ++used;
      continue;
    }
    bool matched = false;
    for (const char* w : kFillerWords) {
      const std::size_t len = std::char_traits<char>::length(w);
      if (word_at(lowered, pos, std::string(w))) {
        pos += len;
        used += len;
        matched = true;
        break;
      }
    }
    if (!matched) return pos;  // an alnum token that is not filler: state candidate
  }
  return used > kMaxFillerBytes ? std::string::npos : pos;
}

// Reads a state token at `pos`. Returns {value, token_end} or nullopt.
std::optional<std::pair<std::uint8_t, std::size_t>> read_state(const std::string& lowered,
                                                               std::size_t pos) {
  struct Token {
    const char* text;
    std::uint8_t value;
  };
  static const Token kTokens[] = {{"activated", 1}, {"deactivated", 0}, {"on", 1},
                                  {"off", 0},       {"1", 1},           {"0", 0}};
  for (const auto& t : kTokens) {
    const std::string word(t.text);
    if (word_at(lowered, pos, word)) return std::make_pair(t.value, pos + word.size());
  }
  return std::nullopt;
}

struct Block {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<Pair> pairs;
};

// Splits the reply into blank-line-delimited blocks, byte offsets preserved.
std::vector<Block> split_blocks(const std::string& text) {
  std::vector<Block> blocks;
  std::size_t pos = 0;
  std::size_t block_begin = std::string::npos;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    bool blank = true;
    for (std::size_t i = pos; i < eol; ++i) {
      if (!std::isspace(static_cast<unsigned char>(text[i]))) {
        blank = false;
        break;
      }
    }
    if (blank) {
      if (block_begin != std::string::npos) {
        blocks.push_back({block_begin, pos == 0 ? 0 : pos - 1, {}});
        block_begin = std::string::npos;
      }
    } else if (block_begin == std::string::npos) {
      block_begin = pos;
    }
    if (eol == text.size()) {
      if (block_begin != std::string::npos) blocks.push_back({block_begin, text.size(), {}});
      break;
    }
    pos = eol + 1;
  }
  return blocks;
}

std::vector<Pair> extract_pairs(const std::string& lowered, const Block& block,
                                const std::vector<std::string>& lowered_names) {
  std::vector<Pair> pairs;
  for (std::size_t pos = block.begin; pos < block.end; ++pos) {
    if (word_byte(lowered[pos]) && (pos == 0 || !word_byte(lowered[pos - 1]))) {
      for (std::size_t s = 0; s < lowered_names.size(); ++s) {
        const std::string& name = lowered_names[s];
        if (pos + name.size() > block.end) continue;
        if (!word_at(lowered, pos, name)) continue;
        const std::size_t after = skip_filler(lowered, pos + name.size(), block.end);
        if (after == std::string::npos || after >= block.end) break;
        if (auto state = read_state(lowered, after); state && state->second <= block.end) {
          pairs.push_back({s, state->first, pos, state->second});
          pos = state->second - 1;  // resume after the state token
        }
        break;  // symbol names never share a start position
      }
    }
  }
  return pairs;
}

// The answer is the last block whose pairs cover at least half the symbols.
std::optional<Block> select_answer_block(const std::string& text,
                                         const std::vector<std::string>& symbol_names) {
  if (symbol_names.empty()) throw ParameterError("parse_configuration needs symbol names");
  const std::string lowered = to_lower_ascii(text);
  std::vector<std::string> lowered_names;
  lowered_names.reserve(symbol_names.size());
  for (const auto& name : symbol_names) lowered_names.push_back(to_lower_ascii(name));

  std::vector<Block> blocks = split_blocks(text);
  std::optional<Block> answer;
  for (auto& b : blocks) {
    b.pairs = extract_pairs(lowered, b, lowered_names);
    if (2 * b.pairs.size() >= symbol_names.size()) answer = b;
  }
  return answer;
}

}  // namespace

std::optional<Span> find_answer_block(const std::string& text,
                                      const std::vector<std::string>& symbol_names) {
  const auto answer = select_answer_block(text, symbol_names);
  if (!answer) return std::nullopt;
  return Span{answer->begin, answer->end};
}

Configuration parse_configuration(const std::string& text,
                                  const std::vector<std::string>& symbol_names) {
  const std::size_t n = symbol_names.size();
  const auto answer = select_answer_block(text, symbol_names);
  if (!answer) {
    throw ParseError("no recognizable answer block: no section assigns states to at least half "
                     "of the symbols",
                     "");
  }

  std::vector<std::optional<std::uint8_t>> values(n);
  for (const auto& p : answer->pairs) {
    if (values[p.symbol]) {
      throw ParseError("symbol '" + symbol_names[p.symbol] + "' is assigned more than once in the "
                       "answer block",
                       text.substr(p.begin, p.end - p.begin));
    }
    values[p.symbol] = p.value;
  }
  std::string missing;
  for (std::size_t s = 0; s < n; ++s) {
    if (!values[s]) missing += missing.empty() ? symbol_names[s] : ", " + symbol_names[s];
  }
  if (!missing.empty()) {
    throw ParseError("answer block leaves symbols unassigned: " + missing,
                     text.substr(answer->begin, answer->end - answer->begin));
  }

  std::vector<std::uint8_t> bits(n);
  for (std::size_t s = 0; s < n; ++s) bits[s] = *values[s];
  return Configuration(std::move(bits));
}

std::vector<LabeledSpan> classify_label(Client& client, const Rubric& rubric,
                                        const std::string& text) {
  const std::vector<Span> sentences = segment_sentences(text);
  if (sentences.empty()) return {};

  std::ostringstream user;
  user << "Sentences:\n";
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    user << (i + 1) << ". " << span_text(text, sentences[i]) << "\n";
  }

  const CompletionResult res = client.complete({{Role::system, rubric.instructions},
                                                {Role::user, user.str()}});

  std::vector<std::optional<std::string>> assigned(sentences.size());
  std::istringstream lines(res.text);
  std::string line;
  while (std::getline(lines, line)) {
    std::size_t pos = 0;
    while (pos < line.size() && !std::isdigit(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos == line.size()) continue;
    std::size_t digits_end = pos;
    while (digits_end < line.size() && std::isdigit(static_cast<unsigned char>(line[digits_end])))
      ++digits_end;
    std::size_t index = 0;
    try {
      index = std::stoul(line.substr(pos, digits_end - pos));
    } catch (const std::exception&) {
      continue;
    }
    std::size_t label_begin = digits_end;
    while (label_begin < line.size() && !word_byte(line[label_begin])) ++label_begin;
    std::size_t label_end = label_begin;
    while (label_end < line.size() && word_byte(line[label_end])) ++label_end;
    if (label_begin == label_end) continue;
    const std::string label = to_lower_ascii(line.substr(label_begin, label_end - label_begin));

    if (index < 1 || index > sentences.size()) {
      throw ClassifierFormatError("label reply names sentence " + std::to_string(index) +
                                  " but only " + std::to_string(sentences.size()) + " were sent");
    }
    if (std::find(rubric.labels.begin(), rubric.labels.end(), label) == rubric.labels.end()) {
      throw ClassifierFormatError("label reply uses unknown label '" + label + "'");
    }
    assigned[index - 1] = label;
  }

  std::string missing;
  for (std::size_t i = 0; i < assigned.size(); ++i) {
    if (!assigned[i]) missing += missing.empty() ? std::to_string(i + 1) : ", " + std::to_string(i + 1);
  }
  if (!missing.empty()) {
    throw ClassifierFormatError("label reply leaves sentences unlabeled: " + missing);
  }

  std::vector<LabeledSpan> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    out.push_back({sentences[i], std::move(*assigned[i])});
  }
  return out;
}

}  // namespace searchlab
