#include "lcm/synthetic.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "lcm/error.h"
#include "lcm/rng.h"

#ifndef LCM_DATA_DIR
#define LCM_DATA_DIR "data"
#endif

namespace lcm {

using nlohmann::json;

void SyntheticGrammar::validate() const {
  if (nouns.empty() && stem_syllables.empty()) throw ConfigError("grammar: empty nominal lexicon");
  if (verbs.empty()) throw ConfigError("grammar: empty verb lexicon");
  if (declensions.empty()) throw ConfigError("grammar: no declensions");
  if (novel_stem_prob > 0.0 && (stem_syllables.empty() || stem_codas.empty() || stem_syllable_counts.empty())) {
    throw ConfigError("grammar: novel stems requested but no syllable inventory");
  }
  for (const std::string& c : cases) {
    auto rule = case_rules.find(c);
    if (rule == case_rules.end()) throw ConfigError("grammar: no rule for case " + c);
    if (rule->second.head != "verb" && rule->second.head != "noun") {
      throw ConfigError("grammar: case " + c + " has unknown head kind '" + rule->second.head + "'");
    }
  }
  for (const auto& [name, decl] : declensions) {
    for (const char* number : {"Sg", "Pl"}) {
      auto it = decl.suffixes.find(number);
      if (it == decl.suffixes.end()) throw ConfigError("grammar: declension " + name + " lacks " + number);
      for (const std::string& c : cases) {
        if (!it->second.count(c)) {
          throw ConfigError("grammar: declension " + name + " lacks " + number + " " + c);
        }
      }
    }
  }
  for (const Noun& n : nouns) {
    if (!declensions.count(n.declension)) {
      throw ConfigError("grammar: noun " + n.stem + " has unknown declension " + n.declension);
    }
  }
  for (const auto& [gender, decl] : adjective_declension) {
    if (!declensions.count(decl)) throw ConfigError("grammar: unknown adjective declension " + decl);
  }
  if (!adjectives.empty()) {
    for (const auto& [name, decl] : declensions) {
      if (!adjective_declension.count(decl.gender)) {
        throw ConfigError("grammar: no adjective declension for gender " + decl.gender);
      }
    }
  }
  if (!verb_endings.count("Sg") || !verb_endings.count("Pl")) throw ConfigError("grammar: verb endings need Sg and Pl");
}

SyntheticGrammar parse_grammar_json(const std::string& text) {
  SyntheticGrammar g;
  try {
    json j = json::parse(text);
    g.name = j.value("name", "");
    g.cases = j.at("cases").get<std::vector<std::string>>();
    for (auto& [c, rule] : j.at("case_rules").items()) {
      g.case_rules[c] = {rule.at("deprel").get<std::string>(), rule.at("head").get<std::string>()};
    }
    g.argument_probs = j.at("argument_probs").get<std::map<std::string, double>>();
    for (auto& [name, d] : j.at("declensions").items()) {
      SyntheticGrammar::Declension decl;
      decl.gender = d.at("gender").get<std::string>();
      for (const char* number : {"Sg", "Pl"}) {
        if (d.contains(number)) decl.suffixes[number] = d.at(number).get<std::map<std::string, std::string>>();
      }
      g.declensions[name] = std::move(decl);
    }
    g.adjective_declension = j.value("adjective_declension", std::map<std::string, std::string>{});
    for (const json& n : j.at("nouns")) {
      g.nouns.push_back({n.at("stem").get<std::string>(), n.at("class").get<std::string>()});
    }
    g.adjectives = j.value("adjectives", std::vector<std::string>{});
    g.verbs = j.at("verbs").get<std::vector<std::string>>();
    g.verb_endings = j.at("verb_endings").get<std::map<std::string, std::string>>();
    g.adverbs = j.value("adverbs", std::vector<std::string>{});
    g.punctuation = j.value("punctuation", "");
    g.stem_syllables = j.value("stem_syllables", std::vector<std::string>{});
    g.stem_codas = j.value("stem_codas", std::vector<std::string>{});
    g.stem_syllable_counts = j.value("stem_syllable_counts", std::vector<int>{});
    g.novel_stem_prob = j.value("novel_stem_prob", 0.0);
    g.plural_prob = j.value("plural_prob", 0.0);
    g.genitive_prob = j.value("genitive_prob", 0.0);
    g.adjective_prob = j.value("adjective_prob", 0.0);
    g.adverb_prob = j.value("adverb_prob", 0.0);
    g.scramble_prob = j.value("scramble_prob", 0.0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grammar: ") + e.what());
  }
  g.validate();
  return g;
}

SyntheticGrammar load_grammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grammar " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grammar_json(buf.str());
}

std::string default_grammar_path() { return std::string(LCM_DATA_DIR) + "/synthetic_grammar.json"; }

namespace {

// Token under construction; `head_slot` indexes into the unordered pool.
struct Item {
  Token token;
  int head_slot = -1;  // -1 = root
  bool is_adjective = false;
};

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[rng.below(items.size())];
}

class SentenceBuilder {
 public:
  SentenceBuilder(const SyntheticGrammar& g, Rng rng) : g_(g), rng_(rng) {}

  Sentence build() {
    // Verb.
    std::vector<std::vector<int>> blocks;
    int verb = add_item("VERB");
    blocks.push_back({verb});

    std::string subject_number = "Sg";
    for (const std::string& c : g_.cases) {
      const auto& rule = g_.case_rules.at(c);
      if (rule.head != "verb") continue;
      auto p = g_.argument_probs.find(c);
      if (p == g_.argument_probs.end() || !rng_.bernoulli(p->second)) continue;
      std::vector<int> block;
      auto [noun, number, gender] = add_noun(c, verb, rule.deprel);
      if (c == "Nom") subject_number = number;
      std::vector<int> np = {noun};
      if (!g_.adjectives.empty() && rng_.bernoulli(g_.adjective_prob)) {
        int adj = add_adjective(c, number, gender, noun);
        if (rng_.bernoulli(0.5)) np.insert(np.begin(), adj);
        else np.push_back(adj);
      }
      if (rng_.bernoulli(g_.genitive_prob)) {
        for (const std::string& gc : g_.cases) {
          const auto& grule = g_.case_rules.at(gc);
          if (grule.head != "noun") continue;
          auto gen = add_noun(gc, noun, grule.deprel);
          // genitive immediately precedes its head noun
          auto it = std::find(np.begin(), np.end(), noun);
          np.insert(it, std::get<0>(gen));
          break;
        }
      }
      blocks.push_back(np);
    }
    if (!g_.adverbs.empty() && rng_.bernoulli(g_.adverb_prob)) {
      int adv = add_item("ADV");
      items_[adv].token.form = pick(g_.adverbs, rng_);
      items_[adv].token.lemma = items_[adv].token.form;
      items_[adv].token.deprel = "advmod";
      items_[adv].head_slot = verb;
      blocks.push_back({adv});
    }

    Feats& vf = items_[verb].token.feats;
    vf["Number"] = subject_number;
    vf["Person"] = "3";
    const std::string& vstem = pick(g_.verbs, rng_);
    items_[verb].token.form = vstem + g_.verb_endings.at(subject_number);
    items_[verb].token.lemma = vstem;
    items_[verb].token.deprel = "root";

    rng_.shuffle(blocks);
    std::vector<int> order;
    for (const auto& b : blocks) order.insert(order.end(), b.begin(), b.end());

    // Displace adjectives away from their nouns.
    for (int slot = 0; slot < static_cast<int>(items_.size()); ++slot) {
      if (!items_[slot].is_adjective || !rng_.bernoulli(g_.scramble_prob)) continue;
      auto it = std::find(order.begin(), order.end(), slot);
      order.erase(it);
      std::size_t pos = rng_.below(order.size() + 1);
      order.insert(order.begin() + static_cast<long>(pos), slot);
    }

    if (!g_.punctuation.empty()) {
      int p = add_item("PUNCT");
      items_[p].token.form = g_.punctuation;
      items_[p].token.lemma = g_.punctuation;
      items_[p].token.deprel = "punct";
      items_[p].head_slot = verb;
      order.push_back(p);
    }

    std::vector<int> position(items_.size());
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<int>(i) + 1;
    Sentence s;
    for (std::size_t i = 0; i < order.size(); ++i) {
      Item& item = items_[order[i]];
      item.token.id = static_cast<int>(i) + 1;
      item.token.head = item.head_slot < 0 ? 0 : position[item.head_slot];
      s.tokens.push_back(item.token);
    }
    return s;
  }

 private:
  int add_item(const std::string& upos) {
    Item item;
    item.token.upos = upos;
    items_.push_back(std::move(item));
    return static_cast<int>(items_.size()) - 1;
  }

  std::string novel_stem() {
    int count = pick(g_.stem_syllable_counts, rng_);
    std::string stem;
    for (int i = 0; i < count; ++i) stem += pick(g_.stem_syllables, rng_);
    return stem + pick(g_.stem_codas, rng_);
  }

  std::tuple<int, std::string, std::string> add_noun(const std::string& c, int head, const std::string& deprel) {
    std::string stem, decl_name;
    if (g_.nouns.empty() || rng_.bernoulli(g_.novel_stem_prob)) {
      stem = novel_stem();
      auto it = g_.declensions.begin();
      std::advance(it, static_cast<long>(rng_.below(g_.declensions.size())));
      decl_name = it->first;
    } else {
      const auto& n = pick(g_.nouns, rng_);
      stem = n.stem;
      decl_name = n.declension;
    }
    const auto& decl = g_.declensions.at(decl_name);
    std::string number = rng_.bernoulli(g_.plural_prob) ? "Pl" : "Sg";
    int slot = add_item("NOUN");
    Token& t = items_[slot].token;
    t.form = stem + decl.suffixes.at(number).at(c);
    t.lemma = stem;
    t.feats = {{"Case", c}, {"Gender", decl.gender}, {"Number", number}};
    t.deprel = deprel;
    items_[slot].head_slot = head;
    return {slot, number, decl.gender};
  }

  int add_adjective(const std::string& c, const std::string& number, const std::string& gender, int noun) {
    std::string stem = rng_.bernoulli(g_.novel_stem_prob) ? novel_stem() : pick(g_.adjectives, rng_);
    const auto& decl = g_.declensions.at(g_.adjective_declension.at(gender));
    int slot = add_item("ADJ");
    Token& t = items_[slot].token;
    t.form = stem + decl.suffixes.at(number).at(c);
    t.lemma = stem;
    t.feats = {{"Case", c}, {"Gender", gender}, {"Number", number}};
    t.deprel = "amod";
    items_[slot].head_slot = noun;
    items_[slot].is_adjective = true;
    return slot;
  }

  const SyntheticGrammar& g_;
  Rng rng_;
  std::vector<Item> items_;
};

}  // namespace

Treebank gen_synthetic(std::uint64_t seed, std::size_t n_sentences, const SyntheticGrammar& grammar) {
  grammar.validate();
  Treebank tb;
  tb.name = "synthetic-" + std::to_string(seed);
  Rng root = Rng(seed).split("synthetic");
  for (std::size_t i = 0; i < n_sentences; ++i) {
    Sentence s = SentenceBuilder(grammar, root.split(i)).build();
    std::string id = "synth-" + std::to_string(seed) + "-" + std::to_string(i + 1);
    s.sent_id = id;
    s.comments.push_back("# sent_id = " + id);
    tb.sentences.push_back(std::move(s));
  }
  return tb;
}

}  // namespace lcm
