#include <doctest.h>

#include "lcm/conllu.h"
#include "lcm/error.h"
#include "lcm/synthetic.h"
#include "support.h"

using namespace lcm;
using lcm::testing::sentence_r;

TEST_CASE("single token line parses to a root sentence") {
  const Treebank tb = parse_conllu("1\tkhādati\tkhād\tVERB\t_\t_\t0\troot\t_\t_\n");
  REQUIRE(tb.size() == 1);
  REQUIRE(tb.sentences[0].size() == 1);
  CHECK(tb.sentences[0].tokens[0].head == 0);
  CHECK(tb.sentences[0].tokens[0].deprel == "root");
  CHECK(tb.sentences[0].tokens[0].form == "khādati");
}

TEST_CASE("sentence R round-trips") {
  Treebank tb = lcm::testing::treebank_of({sentence_r()});
  tb.sentences[0].sent_id = "r1";
  tb.sentences[0].comments = {"# sent_id = r1", "# text = rāmaḥ phalam khādati"};
  const Treebank back = parse_conllu(write_conllu(tb));
  CHECK(back.sentences == tb.sentences);
  CHECK(write_conllu(back) == write_conllu(tb));
}

TEST_CASE("multiword ranges and empty nodes are kept verbatim") {
  const std::string text =
      "1-2\tab\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\ta\t_\tNOUN\t_\t_\t2\tnsubj\t_\t_\n"
      "2\tb\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
      "2.1\tc\t_\t_\t_\t_\t_\t_\t_\t_\n\n";
  const Treebank tb = parse_conllu(text);
  REQUIRE(tb.sentences[0].size() == 2);
  CHECK(tb.sentences[0].opaque.size() == 2);
  CHECK(write_conllu(tb) == text);
}

TEST_CASE("head beyond the sentence reports the line") {
  const std::string text =
      "1\ta\t_\tNOUN\t_\t_\t3\tnsubj\t_\t_\n"
      "2\tb\t_\tNOUN\t_\t_\t5\tobj\t_\t_\n"
      "3\tc\t_\tVERB\t_\t_\t0\troot\t_\t_\n";
  try {
    parse_conllu(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("head out of range, line 2") != std::string::npos);
  }
}

TEST_CASE("malformed lines are rejected") {
  CHECK_THROWS_AS(parse_conllu("1\ta\t_\n"), ParseError);
  CHECK_THROWS_AS(parse_conllu("x\ta\t_\tNOUN\t_\t_\t0\troot\t_\t_\n"), ParseError);
  CHECK_THROWS_AS(parse_conllu("1\ta\t_\tNOUN\t_\t_\t1\troot\t_\t_\n"), ParseError);
}

TEST_CASE("validate_heads") {
  CHECK(validate_heads(std::vector<int>{3, 3, 0}).ok());
  const TreeCheck cycle = validate_heads(std::vector<int>{2, 1, 0});
  CHECK(cycle.violation == TreeViolation::kCycle);
  CHECK(cycle.nodes == std::vector<int>{1, 2});
  const TreeCheck multi = validate_heads(std::vector<int>{0, 0, 1});
  CHECK(multi.violation == TreeViolation::kMultiRoot);
  CHECK(validate_heads(std::vector<int>{1}).violation == TreeViolation::kSelfLoop);
  CHECK(validate_heads(std::vector<int>{2, 2}).violation == TreeViolation::kSelfLoop);
  CHECK(validate_heads(std::vector<int>{4, 0, 1}).violation == TreeViolation::kHeadOutOfRange);
  CHECK(validate_heads(std::vector<int>{2, 1}).violation == TreeViolation::kCycle);
  CHECK(validate_heads(std::vector<int>{3, 0, 4, 3}).violation == TreeViolation::kCycle);
}

TEST_CASE("feature serialization") {
  CHECK(format_feats({}) == "_");
  CHECK(format_feats({{"Number", "Sg"}, {"Case", "Nom"}}) == "Case=Nom|Number=Sg");
  CHECK(parse_feats("Case=Nom|Number=Sg") == Feats{{"Case", "Nom"}, {"Number", "Sg"}});
  CHECK(parse_feats("_").empty());
  Sentence s = sentence_r();
  s.tokens[2].feats.clear();
  const std::string text = write_conllu(lcm::testing::treebank_of({s}));
  CHECK(text.find("khādati\tkhād\tVERB\t_\t_\t0") != std::string::npos);
}

TEST_CASE("two sentences are separated by one blank line") {
  const std::string text = write_conllu(lcm::testing::treebank_of({sentence_r(), sentence_r()}));
  CHECK(text.find("\n\n\n") == std::string::npos);
  CHECK(text.size() >= 2);
  CHECK(text.substr(text.size() - 2) == "\n\n");
  std::size_t blocks = 0;
  for (std::size_t pos = 0; (pos = text.find("\n\n", pos)) != std::string::npos; pos += 2) ++blocks;
  CHECK(blocks == 2);
}

TEST_CASE("synthetic generator") {
  const SyntheticGrammar g = load_grammar(default_grammar_path());
  SUBCASE("deterministic per seed") {
    CHECK(write_conllu(gen_synthetic(7, 1, g)) == write_conllu(gen_synthetic(7, 1, g)));
    CHECK(write_conllu(gen_synthetic(7, 20, g)) != write_conllu(gen_synthetic(8, 20, g)));
  }
  SUBCASE("nominals carry case, verbs do not, and case fixes the relation") {
    const Treebank tb = gen_synthetic(3, 200, g);
    std::size_t acc = 0;
    for (const auto& s : tb.sentences) {
      CHECK(validate_tree(s).ok());
      for (const auto& t : s.tokens) {
        if (t.upos == "NOUN" || t.upos == "ADJ") CHECK(t.feats.count("Case") == 1);
        if (t.upos == "VERB") CHECK(t.feats.count("Case") == 0);
        const auto c = t.feats.find("Case");
        if (t.upos == "NOUN" && c != t.feats.end()) CHECK(t.deprel == g.case_rules.at(c->second).deprel);
        if (c != t.feats.end() && c->second == "Acc" && t.upos == "NOUN") {
          CHECK(t.deprel == "obj");
          ++acc;
        }
      }
    }
    CHECK(acc > 0);
  }
  SUBCASE("inconsistent grammar is a config error") {
    SyntheticGrammar bad = g;
    bad.verbs.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
}
