#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lcm/conllu.h"

namespace lcm {

// Toy grammar for a free-word-order, case-marking language. Case selects
// both the relation and the kind of head, so morphology rather than word
// identity or position carries the syntactic signal.
struct SyntheticGrammar {
  struct CaseRule {
    std::string deprel;
    std::string head;  // "verb" or "noun"
  };
  struct Declension {
    std::string gender;
    // number -> case -> suffix
    std::map<std::string, std::map<std::string, std::string>> suffixes;
  };
  struct Noun {
    std::string stem;
    std::string declension;
  };

  std::string name;
  std::vector<std::string> cases;
  std::map<std::string, CaseRule> case_rules;
  std::map<std::string, double> argument_probs;
  std::map<std::string, Declension> declensions;
  std::map<std::string, std::string> adjective_declension;  // gender -> declension
  std::vector<Noun> nouns;
  std::vector<std::string> adjectives;
  std::vector<std::string> verbs;
  std::map<std::string, std::string> verb_endings;  // number -> ending
  std::vector<std::string> adverbs;
  std::string punctuation;
  std::vector<std::string> stem_syllables;
  std::vector<std::string> stem_codas;
  std::vector<int> stem_syllable_counts;
  double novel_stem_prob = 0.0;
  double plural_prob = 0.0;
  double genitive_prob = 0.0;
  double adjective_prob = 0.0;
  double adverb_prob = 0.0;
  double scramble_prob = 0.0;

  // Throws ConfigError on an inconsistent grammar (empty lexicon, missing
  // suffixes, unknown declension).
  void validate() const;
};

SyntheticGrammar parse_grammar_json(const std::string& text);
SyntheticGrammar load_grammar(const std::string& path);
// Path of the grammar shipped with the sources (data/synthetic_grammar.json).
std::string default_grammar_path();

Treebank gen_synthetic(std::uint64_t seed, std::size_t n_sentences, const SyntheticGrammar& grammar);

}  // namespace lcm
