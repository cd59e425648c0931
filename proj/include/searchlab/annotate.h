#ifndef SEARCHLAB_ANNOTATE_H
#define SEARCHLAB_ANNOTATE_H

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "searchlab/llm_client.h"
#include "searchlab/text.h"

namespace searchlab {

enum class ClassifierMode { llm, heuristic };

std::string to_string(ClassifierMode m);
ClassifierMode classifier_mode_from_string(const std::string& s);

struct ThoughtAnnotation {
  std::string run_id;
  int trial = 0;  // 1-based
  long forward_chars = 0;
  long backward_chars = 0;
  int breadth = 0;  // distinct symbol names mentioned
  ClassifierMode classifier = ClassifierMode::heuristic;  // the one actually used
  std::vector<LabeledSpan> segments;
};

// Keyed by (run_id, trial); later records win on re-annotation.
using AnnotationIndex = std::map<std::pair<std::string, int>, ThoughtAnnotation>;

struct ClassifyOutcome {
  std::vector<LabeledSpan> segments;
  ClassifierMode used = ClassifierMode::heuristic;
};

// Sentence-level labeling into forward / backward / other. Heuristic mode
// scores each sentence against the bundled keyword lexicons, ties going to
// backward. LLM mode asks the client under the fixed rubric and falls back
// to the heuristic when the reply is malformed; `used` records which path
// produced the labels.
ClassifyOutcome classify(const std::string& text, ClassifierMode mode, Client* client = nullptr);

// Distinct symbol names appearing as whole words, case-insensitive.
int attention_breadth(const std::string& text, const std::vector<std::string>& symbols);

// Blanks the final answer block (the one the parser would read) so the
// deliberation measures see only discussion, not the mandatory restatement of
// every symbol. Byte offsets and newlines are preserved.
std::string strip_answer_block(const std::string& text, const std::vector<std::string>& symbols);

// Forward-to-backward character ratio, total by construction.
double forward_ratio(const ThoughtAnnotation& a);

ThoughtAnnotation annotate_trial(const std::string& run_id, int trial, const std::string& text,
                                 const std::vector<std::string>& symbols, ClassifierMode mode,
                                 Client* client = nullptr);

}  // namespace searchlab

#endif  // SEARCHLAB_ANNOTATE_H
