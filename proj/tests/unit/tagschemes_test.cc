#include <doctest.h>

#include <functional>

#include "lcm/error.h"
#include "lcm/tagschemes.h"
#include "support.h"

using namespace lcm;
using lcm::testing::sentence_r;
using Labels = std::vector<std::string>;

TEST_CASE("derived tags of sentence R") {
  const Sentence r = sentence_r();
  CHECK(derive_tags(r, TagScheme::CT).labels == Labels{"Nom", "Acc", "VERB"});
  CHECK(derive_tags(r, TagScheme::RD).labels == Labels{"1", "1", "0"});
  CHECK(derive_tags(r, TagScheme::NC).labels == Labels{"0", "0", "2"});
  CHECK(derive_tags(r, TagScheme::RP).labels == Labels{"R_VERB", "R_VERB", "ROOT"});
  CHECK(derive_tags(r, TagScheme::MT).labels == Labels{"Case=Nom|Number=Sg", "Case=Acc|Number=Sg", "Number=Sg|Person=3"});
  CHECK(derive_tags(r, TagScheme::LT).labels == Labels{"nsubj", "obj", "root"});
  CHECK(derive_tags(r, TagScheme::LM).labels == Labels{"phalam", "khādati", "<EOS>"});
  CHECK(derive_tags(r, TagScheme::CP).labels == Labels{"NOUN", "NOUN", "VERB"});
  CHECK(derive_tags(r, TagScheme::HW).labels == Labels{"khādati", "khādati", "<ROOT>"});
  CHECK(derive_tags(r, TagScheme::PHW).labels == Labels{"VERB", "VERB", "<ROOT>"});
  CHECK(derive_tags(r, TagScheme::NT).labels == Labels{"Sg", "Sg", "Sg"});
  CHECK(derive_tags(r, TagScheme::PT).labels == Labels{"NOUN", "NOUN", "3"});
  CHECK(derive_tags(r, TagScheme::GT).labels == Labels{"NOUN", "NOUN", "VERB"});
}

TEST_CASE("direction in RP follows head position") {
  Sentence s = sentence_r();
  // Verb first: its dependents now have heads to their left.
  s.tokens[0].head = 0;
  s.tokens[0].upos = "VERB";
  s.tokens[1].head = 1;
  s.tokens[2].head = 1;
  s.tokens[2].upos = "NOUN";
  CHECK(derive_tags(s, TagScheme::RP).labels == Labels{"ROOT", "L_VERB", "L_VERB"});
}

TEST_CASE("depth and child counts are capped") {
  Sentence chain;
  for (int i = 1; i <= 5; ++i) {
    Token t;
    t.id = i;
    t.form = "x";
    t.upos = "NOUN";
    t.head = i - 1;
    t.deprel = i == 1 ? "root" : "dep";
    chain.tokens.push_back(t);
  }
  TagOptions opts;
  opts.cap_depth = 3;
  CHECK(derive_tags(chain, TagScheme::RD, opts).labels == Labels{"0", "1", "2", "≥3", "≥3"});
  Sentence star = chain;
  for (int i = 2; i <= 5; ++i) star.tokens[i - 1].head = 1;
  opts.cap_children = 2;
  CHECK(derive_tags(star, TagScheme::NC, opts).labels == Labels{"≥2", "0", "0", "0", "0"});
}

TEST_CASE("tree-derived schemes need a valid tree") {
  Sentence cyclic = sentence_r();
  cyclic.tokens[0].head = 2;
  cyclic.tokens[1].head = 1;
  for (TagScheme s : kAllSchemes) {
    if (scheme_uses_tree(s)) {
      CHECK_THROWS_AS(derive_tags(cyclic, s), DerivationError);
    } else {
      CHECK(derive_tags(cyclic, s).labels.size() == 3);
    }
  }
  cyclic.sent_id = "bad-7";
  const Treebank tb = lcm::testing::treebank_of({sentence_r(), cyclic});
  try {
    derive_treebank_tags(tb, TagScheme::RD);
    FAIL("expected a derivation error");
  } catch (const DerivationError& e) {
    CHECK(std::string(e.what()).find("sentence 1 (bad-7)") != std::string::npos);
  }
}

TEST_CASE("treebank derivation maps over sentences") {
  const auto seqs = derive_treebank_tags(lcm::testing::treebank_of({sentence_r(), sentence_r()}), TagScheme::CT);
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0] == seqs[1]);
  CHECK(derive_treebank_tags(Treebank{}, TagScheme::CT).empty());
}

TEST_CASE("tag vocabulary") {
  const std::vector<TagSequence> seqs = {{TagScheme::CT, {"a", "b", "a"}}, {TagScheme::CT, {"a"}}};
  const Vocab v = build_tag_vocab(seqs, 2);
  CHECK(v.symbols() == Labels{"<PAD>", "<UNK>", "a"});
  CHECK(v.lookup("b") == Vocab::kUnk);
  const Vocab all = build_tag_vocab(seqs, 1);
  CHECK(all.symbols() == Labels{"<PAD>", "<UNK>", "a", "b"});
  CHECK(build_tag_vocab(seqs, 1) == all);
  CHECK(default_min_freq(TagScheme::LM) == 2);
  CHECK(default_min_freq(TagScheme::HW) == 2);
  CHECK(default_min_freq(TagScheme::CT) == 1);
}

TEST_CASE("scheme names round-trip") {
  for (TagScheme s : kAllSchemes) CHECK(scheme_from_name(scheme_name(s)) == s);
  CHECK_FALSE(scheme_from_name("XX").has_value());
}

TEST_CASE("tag TSV round-trips") {
  const TaggedCorpus c = make_tagged_corpus(lcm::testing::treebank_of({sentence_r(), sentence_r()}), TagScheme::CT);
  const std::string tsv = write_tag_tsv(c);
  CHECK(tsv.rfind("rāmaḥ\tNom\nphalam\tAcc\nkhādati\tVERB\n\n", 0) == 0);
  const TaggedCorpus back = parse_tag_tsv(tsv, TagScheme::CT);
  REQUIRE(back.size() == 2);
  CHECK(back.tags[1] == c.tags[1]);
  CHECK(back.sentences[0].tokens[1].form == "phalam");
  CHECK_THROWS_AS(parse_tag_tsv("a\tb\tc\n", TagScheme::CT), ParseError);
}

// Depth by walking to the root, independent of the library's traversal.
static int path_depth(const std::vector<int>& heads, int token) {
  int d = 0;
  for (int t = token; heads[t - 1] != 0; t = heads[t - 1]) ++d;
  return d;
}

TEST_CASE("random trees agree with brute-force oracles") {
  Rng rng(11);
  TagOptions uncapped{100, 100};
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(8));
    const auto heads = lcm::testing::random_tree(rng, n);
    const Sentence s = lcm::testing::sentence_with_heads(heads, rng);
    for (TagScheme scheme : kAllSchemes) CHECK(derive_tags(s, scheme).labels.size() == s.size());
    CHECK(derive_tags(s, TagScheme::LT).labels == s.deprels());
    const auto rd = derive_tags(s, TagScheme::RD, uncapped).labels;
    int nc_total = 0;
    for (const auto& v : derive_tags(s, TagScheme::NC, uncapped).labels) nc_total += std::stoi(v);
    CHECK(nc_total == n - 1);
    for (int i = 1; i <= n; ++i) CHECK(rd[i - 1] == std::to_string(path_depth(heads, i)));
    const auto ct = derive_tags(s, TagScheme::CT).labels;
    for (int i = 0; i < n; ++i) {
      const auto& t = s.tokens[i];
      CHECK(ct[i] == (t.feats.count("Case") ? t.feats.at("Case") : t.upos));
    }
  }
}
