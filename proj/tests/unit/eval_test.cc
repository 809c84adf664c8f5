#include <doctest.h>

#include "lcm/error.h"
#include "lcm/eval/eval.h"
#include "support.h"

using namespace lcm;
using namespace lcm::eval;
using lcm::parser::ParseTree;

static Treebank gold_r() { return lcm::testing::treebank_of({lcm::testing::sentence_r()}); }

TEST_CASE("hand-counted attachment scores") {
  const Treebank gold = gold_r();
  const AttachmentScore perfect = uas_las(gold, {{{3, 3, 0}, {"nsubj", "obj", "root"}}});
  CHECK(perfect.uas == 100.0);
  CHECK(perfect.las == 100.0);
  const AttachmentScore label = uas_las(gold, {{{3, 3, 0}, {"obj", "obj", "root"}}});
  CHECK(format_score(label.uas) == "100.00");
  CHECK(format_score(label.las) == "66.67");
  CHECK(label.per_relation.at("nsubj").label_correct == 0);
  const AttachmentScore head = uas_las(gold, {{{1, 3, 0}, {"nsubj", "obj", "root"}}});
  CHECK(format_score(head.uas) == "66.67");
  CHECK(format_score(head.las) == "66.67");
  CHECK(head.total == 3);
  CHECK(head.head_correct == 2);
}

TEST_CASE("punctuation policy") {
  Treebank gold = gold_r();
  Token p;
  p.id = 4;
  p.form = ".";
  p.upos = "PUNCT";
  p.head = 3;
  p.deprel = "punct";
  gold.sentences[0].tokens.push_back(p);
  const std::vector<ParseTree> pred = {{{3, 3, 0, 1}, {"nsubj", "obj", "root", "punct"}}};
  CHECK(uas_las(gold, pred, PunctPolicy::kInclude).total == 4);
  CHECK(uas_las(gold, pred, PunctPolicy::kExclude).uas == 100.0);
  CHECK(punct_policy_from_name("exclude") == PunctPolicy::kExclude);
  CHECK_THROWS_AS(punct_policy_from_name("maybe"), ConfigError);
}

TEST_CASE("misaligned inputs are contract errors") {
  CHECK_THROWS_AS(uas_las(gold_r(), {}), ContractError);
  CHECK_THROWS_AS(uas_las(gold_r(), {{{0, 1}, {"root", "obj"}}}), ContractError);
}

TEST_CASE("report rendering") {
  AttachmentScore s;
  s.uas = 70.666666;
  s.las = 56.849999;
  const std::string table = report({{"Base", s}});
  CHECK(table.find("70.67 / 56.85") != std::string::npos);
  CHECK(report({}).find("70") == std::string::npos);
  AttachmentScore bad;
  bad.uas = 50.0;
  bad.las = 60.0;
  CHECK_THROWS_AS(report({{"bad", bad}}), ContractError);
}

TEST_CASE("metrics JSON round-trips and validates") {
  const AttachmentScore s = uas_las(gold_r(), {{{1, 3, 0}, {"obj", "obj", "root"}}});
  const auto j = score_to_json("run", s, config_digest({{"a", 1}}));
  validate_metrics_json(j);
  CHECK(score_from_json(j) == s);
  CHECK(config_digest({{"a", 1}}).size() == 16);
  CHECK(config_digest({{"a", 1}}) != config_digest({{"a", 2}}));
  auto broken = j;
  broken.erase("uas");
  CHECK_THROWS_AS(validate_metrics_json(broken), DataError);
  auto inverted = j;
  inverted["las"] = 99.0;
  CHECK_THROWS_AS(validate_metrics_json(inverted), DataError);
}
