#include "searchlab/fixtures.h"

#include <sstream>

#include "searchlab/error.h"
#include "searchlab/hash.h"

namespace searchlab {

namespace {

const std::vector<std::string>& greek_alphabet() {
  static const std::vector<std::string> letters = {
      "alpha", "beta",  "gamma",   "delta", "epsilon", "zeta", "eta",     "theta",
      "iota",  "kappa", "lambda",  "mu",    "nu",      "xi",   "omicron", "pi",
      "rho",   "sigma", "tau",     "upsilon"};
  return letters;
}

std::string joined_symbols(int n) {
  const auto names = symbol_names(n);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i > 0) out += i + 1 == n ? ", and " : ", ";
    out += names[static_cast<std::size_t>(i)];
  }
  return out;
}

struct FramingText {
  std::string narrative;     // scene-setting paragraph
  std::string noun;          // what one decision is called
  std::string act;           // verb for submitting, e.g. "sell"
  std::string act_noun;      // what one submission is called
};

FramingText framing_text(Framing f, int n) {
  const std::string count = std::to_string(n);
  switch (f) {
    case Framing::alien:
      return {"Imagine you have made contact with an alien. The alien buys art pictures that are "
              "composed of " + count + " symbols, and every symbol can be switched on or off. Which "
              "symbol pattern the alien prefers is unknown to you; the only way to find out is to "
              "design a picture and sell it to the alien.",
              "symbol", "sell", "picture"};
    case Framing::nutrition:
      return {"Imagine you are studying a newly discovered species of animal from an unexplored "
              "bio-system. Nothing is known about its nutrition. You prepare feed mixtures from " +
              count + " nutrients, and every nutrient can be set to a high level (on) or a low level "
              "(off). Which combination suits the species is unknown; the only way to find out is to "
              "prepare a mixture and feed it.",
              "nutrient", "test", "mixture"};
    case Framing::barebone:
      return {"You are optimizing a configuration of " + count + " binary decision variables. Every "
              "variable can be set on (1) or off (0). Each possible configuration has a fixed but "
              "unknown performance value; the only way to learn it is to test the configuration.",
              "variable", "test", "configuration"};
  }
  throw ParameterError("unknown framing");
}

}  // namespace

std::string to_string(Framing f) {
  switch (f) {
    case Framing::alien: return "alien";
    case Framing::nutrition: return "nutrition";
    case Framing::barebone: return "barebone";
  }
  return "alien";
}

Framing framing_from_string(const std::string& s) {
  if (s == "alien") return Framing::alien;
  if (s == "nutrition") return Framing::nutrition;
  if (s == "barebone") return Framing::barebone;
  throw ParameterError("unknown framing '" + s + "'");
}

std::vector<std::string> symbol_names(int n) {
  const auto& letters = greek_alphabet();
  if (n < 1 || n > static_cast<int>(letters.size())) {
    throw ParameterError("symbol_names: n must lie in [1, " + std::to_string(letters.size()) + "]");
  }
  return {letters.begin(), letters.begin() + n};
}

std::string render_instructions(Framing framing, bool think_aloud, Objective objective,
                                int n, int trials) {
  const FramingText ft = framing_text(framing, n);
  const std::string count = std::to_string(n);
  const std::string rounds = std::to_string(trials);

  std::ostringstream out;
  out << "You are a participant in a decision experiment.\n\n";
  out << ft.narrative << "\n\n";
  out << "The " << count << " " << ft.noun << "s are named by Greek letters: " << joined_symbols(n)
      << ".\n\n";

  out << "You will " << ft.act << " exactly " << rounds << " " << ft.act_noun << "s, one per trial. Each "
      << ft.act_noun << " earns a payoff between 0 and 100 points. A given combination always earns "
      << "the same payoff, no matter how often you " << ft.act << " it. ";
  if (objective == Objective::wealth) {
    out << "After every trial you are told the payoff of that round and your current overall wealth, "
        << "which is the sum of all payoffs received so far.\n\n";
    out << "Your goal is to finish the experiment with the highest possible accumulated wealth over the "
        << rounds << " trials.\n\n";
  } else {
    out << "After every trial you are told the payoff of that round and the highest payoff you have "
        << "achieved so far.\n\n";
    out << "Your goal is to find the combination with the highest possible payoff before the " << rounds
        << " trials run out.\n\n";
  }

  if (think_aloud) {
    out << "While deciding, think aloud: write out every thought that crosses your mind as you work "
        << "toward your next choice.\n\n";
  }

  out << "Each trial, end your reply with a final answer block that lists every " << ft.noun
      << " exactly once with its chosen state, one per line, in the form \"name: on\" or \"name: off\".";
  return out.str();
}

std::vector<QuizQuestion> comprehension_quiz(int trials) {
  const std::string rounds = std::to_string(trials);
  std::vector<QuizQuestion> qs;
  qs.push_back({"How many trials does the experiment have in total?",
                {std::to_string(trials + 6), rounds, std::to_string(trials * 4), "As many as you like"},
                1});
  qs.push_back({"You submit the same combination twice. What happens to the payoff the second time?",
                {"It is drawn at random", "It decreases", "It is exactly the same", "It increases"},
                2});
  qs.push_back({"What do you learn after each trial?",
                {"The payoff of the combination you just submitted",
                 "The payoffs of every possible combination", "Nothing until the experiment ends",
                 "The best possible combination"},
                0});
  qs.push_back({"How must you state your chosen combination in each reply?",
                {"Only the parts you changed", "As a drawing", "Any free-form description",
                 "Every name exactly once with its on/off state"},
                3});
  return qs;
}

std::string render_quiz(int trials) {
  const auto& quiz = comprehension_quiz(trials);
  std::ostringstream out;
  out << "Before the experiment begins, please answer this short comprehension test about the "
      << "instructions.\n";
  for (std::size_t q = 0; q < quiz.size(); ++q) {
    out << "\nQuestion " << (q + 1) << ": " << quiz[q].question << "\n";
    for (std::size_t o = 0; o < quiz[q].options.size(); ++o) {
      out << static_cast<char>('A' + o) << ") " << quiz[q].options[o] << "\n";
    }
  }
  out << "\nReply with the question number and the letter of the correct answer for every question, "
      << "one per line, like \"1: A\".";
  return out.str();
}

const std::vector<std::string>& forward_lexicon() {
  static const std::vector<std::string> words = {
      "next",    "will",     "plan",     "planning", "try",     "trying",  "attempt",
      "strategy", "strategies", "going",  "future",   "expect",  "expecting", "predict",
      "hope",    "hoping",   "aim",      "intend",    "should",  "might",   "maybe",
      "perhaps", "test",     "explore",  "exploring", "flip",    "switch",  "change",
      "keep",    "stick",    "want",     "let's",     "lets",
      "next trial", "next round", "from now on", "this time"};
  return words;
}

const std::vector<std::string>& backward_lexicon() {
  static const std::vector<std::string> words = {
      "previous", "previously", "last",    "earlier",  "prior",   "before",  "learned",
      "learnt",   "noticed",    "observed", "saw",     "was",     "were",    "did",
      "got",      "gave",       "received", "earned",  "yielded", "scored",  "dropped",
      "fell",     "rose",       "improved", "worsened", "tested", "tried",   "flipped",
      "switched", "changed",    "kept",     "happened",
      "so far",   "last round", "last trial", "last time", "up to now", "in the past"};
  return words;
}

const Rubric& attention_rubric() {
  static const Rubric rubric = {
      kRubricVersion,
      "You label sentences from a participant's written thoughts in a trial-based decision "
      "experiment.\n"
      "Label every numbered sentence with exactly one of:\n"
      "- backward: the sentence references previous rounds, past results, or insights already "
      "learned.\n"
      "- forward: the sentence references future trials, next steps, plans, or general strategy.\n"
      "- other: anything else, including bare restatements of the submitted combination.\n"
      "Reply with one line per sentence, in the form \"<number>: <label>\", and nothing else.",
      {"forward", "backward", "other"}};
  return rubric;
}

std::string instructions_hash(Framing framing, bool think_aloud, Objective objective, int n,
                              int trials) {
  return sha256_hex(std::string(kInstructionsVersion) + "\n" +
                    render_instructions(framing, think_aloud, objective, n, trials));
}

std::string quiz_hash(int trials) {
  return sha256_hex(std::string(kQuizVersion) + "\n" + render_quiz(trials));
}

std::string lexicon_hash() {
  std::string blob = std::string(kLexiconVersion) + "\nforward:";
  for (const auto& w : forward_lexicon()) blob += w + ";";
  blob += "\nbackward:";
  for (const auto& w : backward_lexicon()) blob += w + ";";
  return sha256_hex(blob);
}

std::string rubric_hash() {
  const auto& r = attention_rubric();
  std::string blob = r.id + "\n" + r.instructions + "\n";
  for (const auto& l : r.labels) blob += l + ";";
  return sha256_hex(blob);
}

}  // namespace searchlab
