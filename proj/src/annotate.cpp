#include "searchlab/annotate.h"

#include <algorithm>

#include "searchlab/error.h"
#include "searchlab/fixtures.h"

namespace searchlab {

std::string to_string(ClassifierMode m) {
  return m == ClassifierMode::llm ? "llm" : "heuristic";
}

ClassifierMode classifier_mode_from_string(const std::string& s) {
  if (s == "llm") return ClassifierMode::llm;
  if (s == "heuristic") return ClassifierMode::heuristic;
  throw ParameterError("unknown classifier mode '" + s + "'");
}

namespace {

long lexicon_hits(std::string_view sentence, const std::vector<std::string>& lexicon) {
  long hits = 0;
  for (const auto& entry : lexicon) {
    if (entry.find(' ') != std::string::npos) {
      hits += count_phrase(sentence, entry);
    } else {
      hits += count_word(sentence, entry);
    }
  }
  return hits;
}

std::vector<LabeledSpan> classify_heuristic(const std::string& text) {
  const auto& fwd = forward_lexicon();
  const auto& bwd = backward_lexicon();
  std::vector<LabeledSpan> out;
  for (const Span& span : segment_sentences(text)) {
    const std::string_view sentence = span_text(text, span);
    const long f = lexicon_hits(sentence, fwd);
    const long b = lexicon_hits(sentence, bwd);
    const char* label = "other";
    if (f > b) {
      label = "forward";
    } else if (b > 0) {  // ties go backward
      label = "backward";
    }
    out.push_back({span, label});
  }
  return out;
}

}  // namespace

ClassifyOutcome classify(const std::string& text, ClassifierMode mode, Client* client) {
  if (mode == ClassifierMode::heuristic) {
    return {classify_heuristic(text), ClassifierMode::heuristic};
  }
  if (client == nullptr) throw ParameterError("llm classifier mode needs a client");
  try {
    return {classify_label(*client, attention_rubric(), text), ClassifierMode::llm};
  } catch (const ClassifierFormatError&) {
    return {classify_heuristic(text), ClassifierMode::heuristic};
  }
}

int attention_breadth(const std::string& text, const std::vector<std::string>& symbols) {
  return count_distinct_words(text, symbols);
}

double forward_ratio(const ThoughtAnnotation& a) {
  return static_cast<double>(a.forward_chars) /
         static_cast<double>(std::max(a.backward_chars, 1L));
}

std::string strip_answer_block(const std::string& text, const std::vector<std::string>& symbols) {
  if (text.empty()) return text;
  const auto block = find_answer_block(text, symbols);
  if (!block) return text;
  std::string out = text;
  for (std::size_t i = block->begin; i < block->end && i < out.size(); ++i) {
    if (out[i] != '\n') out[i] = ' ';
  }
  return out;
}

ThoughtAnnotation annotate_trial(const std::string& run_id, int trial, const std::string& text,
                                 const std::vector<std::string>& symbols, ClassifierMode mode,
                                 Client* client) {
  ThoughtAnnotation a;
  a.run_id = run_id;
  a.trial = trial;
  // Every reply must restate all n symbol states; measuring over that block
  // would pin breadth at n and say nothing about where attention went.
  const std::string deliberation = strip_answer_block(text, symbols);
  ClassifyOutcome outcome = classify(deliberation, mode, client);
  a.classifier = outcome.used;
  a.segments = std::move(outcome.segments);
  for (const auto& seg : a.segments) {
    const long len = static_cast<long>(seg.span.end - seg.span.begin);
    if (seg.label == "forward") a.forward_chars += len;
    if (seg.label == "backward") a.backward_chars += len;
  }
  a.breadth = attention_breadth(deliberation, symbols);
  return a;
}

}  // namespace searchlab
