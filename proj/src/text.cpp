#include "searchlab/text.h"

#include <cctype>

namespace searchlab {

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0;
}

char lower(unsigned char c) {
  return static_cast<char>(std::tolower(c));
}

// Case-insensitive needle match at position i with word boundaries on both
// sides. The needle must already be lowercase; it may contain spaces.
bool bounded_match_at(std::string_view text, std::size_t i, std::string_view needle) {
  if (i + needle.size() > text.size()) return false;
  for (std::size_t j = 0; j < needle.size(); ++j) {
    if (lower(static_cast<unsigned char>(text[i + j])) != needle[j]) return false;
  }
  if (i > 0 && is_word_byte(static_cast<unsigned char>(text[i - 1]))) return false;
  const std::size_t after = i + needle.size();
  if (after < text.size() && is_word_byte(static_cast<unsigned char>(text[after]))) return false;
  return true;
}

int count_bounded(std::string_view text, std::string_view needle) {
  if (needle.empty()) return 0;
  int count = 0;
  for (std::size_t i = 0; i + needle.size() <= text.size(); ++i) {
    if (bounded_match_at(text, i, needle)) ++count;
  }
  return count;
}

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(static_cast<unsigned char>(c));
  return out;
}

std::vector<Span> segment_sentences(std::string_view text) {
  std::vector<Span> spans;
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    std::size_t b = start;
    std::size_t e = end;
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > b) spans.push_back(Span{b, e});
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      emit(i);
      ++i;
      start = i;
    } else if (c == '.' || c == '!' || c == '?') {
      while (i < text.size() && (text[i] == '.' || text[i] == '!' || text[i] == '?')) ++i;
      emit(i);
      start = i;
    } else {
      ++i;
    }
  }
  emit(text.size());
  return spans;
}

bool contains_word(std::string_view text, std::string_view word) {
  return count_bounded(text, word) > 0;
}

int count_word(std::string_view text, std::string_view word) {
  return count_bounded(text, word);
}

int count_phrase(std::string_view text, std::string_view phrase) {
  return count_bounded(text, phrase);
}

int count_distinct_words(std::string_view text, const std::vector<std::string>& names) {
  int distinct = 0;
  for (const auto& name : names) {
    if (contains_word(text, name)) ++distinct;
  }
  return distinct;
}

}  // namespace searchlab
