// Fixtures shared by the unit and acceptance tests.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "lcm/conllu.h"
#include "lcm/rng.h"
#include "lcm/synthetic.h"

namespace lcm::testing {

// rāmaḥ phalam khādati: subject, object, root verb.
inline Sentence sentence_r() {
  Sentence s;
  Token t1;
  t1.id = 1;
  t1.form = "rāmaḥ";
  t1.lemma = "rāma";
  t1.upos = "NOUN";
  t1.feats = {{"Case", "Nom"}, {"Number", "Sg"}};
  t1.head = 3;
  t1.deprel = "nsubj";
  Token t2 = t1;
  t2.id = 2;
  t2.form = "phalam";
  t2.lemma = "phala";
  t2.feats = {{"Case", "Acc"}, {"Number", "Sg"}};
  t2.deprel = "obj";
  Token t3;
  t3.id = 3;
  t3.form = "khādati";
  t3.lemma = "khād";
  t3.upos = "VERB";
  t3.feats = {{"Number", "Sg"}, {"Person", "3"}};
  t3.head = 0;
  t3.deprel = "root";
  s.tokens = {t1, t2, t3};
  return s;
}

inline Treebank treebank_of(const std::vector<Sentence>& sentences) {
  Treebank tb;
  tb.sentences = sentences;
  return tb;
}

// Uniformly shuffled attachment order: every token hangs off one placed
// before it, so the result is a valid single-root tree.
inline std::vector<int> random_tree(Rng& rng, int n) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  rng.shuffle(order);
  std::vector<int> heads(n, 0);
  for (int i = 1; i < n; ++i) heads[order[i] - 1] = order[rng.below(i)];
  return heads;
}

inline Sentence sentence_with_heads(const std::vector<int>& heads, Rng& rng) {
  static const char* upos[] = {"NOUN", "VERB", "ADJ", "ADV"};
  static const char* cases[] = {"Nom", "Acc", "Gen"};
  Sentence s;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    Token t;
    t.id = static_cast<int>(i) + 1;
    t.form = "w" + std::to_string(rng.below(20));
    t.upos = upos[rng.below(4)];
    if (rng.bernoulli(0.5)) t.feats["Case"] = cases[rng.below(3)];
    if (rng.bernoulli(0.5)) t.feats["Number"] = rng.bernoulli(0.5) ? "Sg" : "Pl";
    t.head = heads[i];
    t.deprel = heads[i] == 0 ? "root" : (rng.bernoulli(0.5) ? "obj" : "nmod");
    s.tokens.push_back(t);
  }
  return s;
}

inline Treebank synthetic(std::uint64_t seed, std::size_t n) {
  return gen_synthetic(seed, n, load_grammar(default_grammar_path()));
}

// Fresh empty directory under the system temp dir.
inline std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lcm-tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// Runs the command-line tool; returns its exit status.
inline int run_cli(const std::string& args, const std::string& log = "") {
  std::string cmd = std::string(LCM_CLI) + " " + args;
  cmd += log.empty() ? " >/dev/null 2>&1" : " >" + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace lcm::testing
