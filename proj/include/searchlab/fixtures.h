#pragma once

#include <string>
#include <vector>

#include "searchlab/game.h"

namespace searchlab {

enum class Framing { alien, nutrition, barebone };

std::string to_string(Framing f);
Framing framing_from_string(const std::string& s);

// Decision symbol names for an n-decision game: the first n Greek letters
// (alpha ... kappa for n = 10). n is capped by the available alphabet.
std::vector<std::string> symbol_names(int n);

inline constexpr const char* kInstructionsVersion = "instructions/v1";
inline constexpr const char* kQuizVersion = "quiz/v1";
inline constexpr const char* kLexiconVersion = "lexicon/v1";
inline constexpr const char* kRubricVersion = "rubric/v1";

// The system instruction block: narrative, symbol list, feedback semantics,
// objective statement, and (optionally) the think-aloud request. Every
// symbol name appears exactly once, in the symbol list.
std::string render_instructions(Framing framing, bool think_aloud, Objective objective,
                                int n = 10, int trials = 24);

struct QuizQuestion {
  std::string question;
  std::vector<std::string> options;  // A, B, C, D
  int correct = 0;                   // index into options
};

// Fixed multiple-choice comprehension test on the instructions.
std::vector<QuizQuestion> comprehension_quiz(int trials = 24);

// The quiz rendered as one user message.
std::string render_quiz(int trials = 24);

// Keyword lexicons for the heuristic thought classifier. Single words match
// whole words; entries containing a space match as bounded phrases.
const std::vector<std::string>& forward_lexicon();
const std::vector<std::string>& backward_lexicon();

struct Rubric {
  std::string id;
  std::string instructions;
  std::vector<std::string> labels;
};

// Labeling rubric for the LLM-based thought classifier.
const Rubric& attention_rubric();

// Fixture hashes recorded in run headers and annotation records.
std::string instructions_hash(Framing framing, bool think_aloud, Objective objective,
                              int n = 10, int trials = 24);
std::string quiz_hash(int trials = 24);
std::string lexicon_hash();
std::string rubric_hash();

}  // namespace searchlab
