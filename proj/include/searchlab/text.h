#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace searchlab {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last byte
  bool operator==(const Span&) const = default;
};

inline std::string_view span_text(std::string_view text, Span s) {
  return text.substr(s.begin, s.end - s.begin);
}

// ASCII lowercase; bytes outside A-Z pass through untouched.
std::string to_lower_ascii(std::string_view s);

// Splits text into sentences: maximal trimmed spans ending at terminal
// punctuation (. ! ?) or line breaks. Whitespace-only pieces are dropped.
std::vector<Span> segment_sentences(std::string_view text);

// Whole-word containment: `word` bounded by non-alphanumeric bytes on both
// sides. Case-insensitive; `word` must already be lowercase.
bool contains_word(std::string_view text, std::string_view word);

// Number of whole-word occurrences of `word` in `text` (case-insensitive).
int count_word(std::string_view text, std::string_view word);

// Case-insensitive substring count of a multi-word phrase.
int count_phrase(std::string_view text, std::string_view phrase);

// How many of `names` occur as whole words in `text` (case-insensitive).
int count_distinct_words(std::string_view text, const std::vector<std::string>& names);

}  // namespace searchlab
