#include "lcm/tagschemes.h"

#include <sstream>

#include "lcm/error.h"

namespace lcm {

namespace {

constexpr std::pair<TagScheme, std::string_view> kNames[] = {
    {TagScheme::MT, "MT"}, {TagScheme::CT, "CT"}, {TagScheme::LT, "LT"},   {TagScheme::RD, "RD"}, {TagScheme::NC, "NC"},
    {TagScheme::RP, "RP"}, {TagScheme::LM, "LM"}, {TagScheme::CP, "CP"},   {TagScheme::HW, "HW"}, {TagScheme::PHW, "PHW"},
    {TagScheme::NT, "NT"}, {TagScheme::PT, "PT"}, {TagScheme::GT, "GT"},
};

std::string feature_or_upos(const Token& t, const char* feature) {
  auto it = t.feats.find(feature);
  return it == t.feats.end() ? t.upos : it->second;
}

std::string capped(int value, int cap) {
  if (value >= cap) return "≥" + std::to_string(cap);
  return std::to_string(value);
}

}  // namespace

std::string_view scheme_name(TagScheme scheme) {
  for (const auto& [s, name] : kNames) {
    if (s == scheme) return name;
  }
  return "?";
}

std::optional<TagScheme> scheme_from_name(std::string_view name) {
  for (const auto& [s, n] : kNames) {
    if (n == name) return s;
  }
  return std::nullopt;
}

bool scheme_uses_tree(TagScheme scheme) {
  switch (scheme) {
    case TagScheme::LT:
    case TagScheme::RD:
    case TagScheme::NC:
    case TagScheme::RP:
    case TagScheme::HW:
    case TagScheme::PHW:
      return true;
    default:
      return false;
  }
}

std::size_t default_min_freq(TagScheme scheme) {
  return scheme == TagScheme::LM || scheme == TagScheme::HW ? 2 : 1;
}

TagSequence derive_tags(const Sentence& sentence, TagScheme scheme, const TagOptions& options) {
  if (scheme_uses_tree(scheme)) {
    TreeCheck check = validate_tree(sentence);
    if (!check.ok()) {
      throw DerivationError(std::string(scheme_name(scheme)) + " needs a valid tree: " + check.describe());
    }
  }
  const auto& toks = sentence.tokens;
  const int n = static_cast<int>(toks.size());
  TagSequence out{scheme, {}};
  out.labels.reserve(toks.size());

  switch (scheme) {
    case TagScheme::MT:
      for (const Token& t : toks) out.labels.push_back(format_feats(t.feats));
      break;
    case TagScheme::CT:
      for (const Token& t : toks) out.labels.push_back(feature_or_upos(t, "Case"));
      break;
    case TagScheme::NT:
      for (const Token& t : toks) out.labels.push_back(feature_or_upos(t, "Number"));
      break;
    case TagScheme::PT:
      for (const Token& t : toks) out.labels.push_back(feature_or_upos(t, "Person"));
      break;
    case TagScheme::GT:
      for (const Token& t : toks) out.labels.push_back(feature_or_upos(t, "Gender"));
      break;
    case TagScheme::LT:
      for (const Token& t : toks) out.labels.push_back(t.deprel);
      break;
    case TagScheme::CP:
      for (const Token& t : toks) out.labels.push_back(t.upos);
      break;
    case TagScheme::RD: {
      // Tokens are visited in an order where heads come first; a valid tree
      // guarantees termination within n passes.
      std::vector<int> depth(n + 1, -1);
      depth[0] = -1;
      for (int pass = 0, done = 0; done < n && pass <= n; ++pass) {
        for (int i = 1; i <= n; ++i) {
          if (depth[i] >= 0) continue;
          int h = toks[i - 1].head;
          if (h == 0) {
            depth[i] = 0;
            ++done;
          } else if (depth[h] >= 0) {
            depth[i] = depth[h] + 1;
            ++done;
          }
        }
      }
      for (int i = 1; i <= n; ++i) out.labels.push_back(capped(depth[i], options.cap_depth));
      break;
    }
    case TagScheme::NC: {
      std::vector<int> children(n + 1, 0);
      for (const Token& t : toks) ++children[t.head];
      for (int i = 1; i <= n; ++i) out.labels.push_back(capped(children[i], options.cap_children));
      break;
    }
    case TagScheme::RP:
      for (const Token& t : toks) {
        if (t.head == 0) {
          out.labels.push_back("ROOT");
        } else {
          out.labels.push_back(std::string(t.head < t.id ? "L" : "R") + "_" + toks[t.head - 1].upos);
        }
      }
      break;
    case TagScheme::LM:
      for (int i = 0; i < n; ++i) out.labels.push_back(i + 1 < n ? toks[i + 1].form : "<EOS>");
      break;
    case TagScheme::HW:
      for (const Token& t : toks) out.labels.push_back(t.head == 0 ? "<ROOT>" : toks[t.head - 1].form);
      break;
    case TagScheme::PHW:
      for (const Token& t : toks) out.labels.push_back(t.head == 0 ? "<ROOT>" : toks[t.head - 1].upos);
      break;
  }
  return out;
}

std::vector<TagSequence> derive_treebank_tags(const Treebank& treebank, TagScheme scheme,
                                              const TagOptions& options) {
  std::vector<TagSequence> out;
  out.reserve(treebank.size());
  for (std::size_t i = 0; i < treebank.size(); ++i) {
    try {
      out.push_back(derive_tags(treebank.sentences[i], scheme, options));
    } catch (const DerivationError& e) {
      const auto& s = treebank.sentences[i];
      throw DerivationError("sentence " + std::to_string(i) + (s.sent_id ? " (" + *s.sent_id + ")" : "") + ": " +
                            e.what());
    }
  }
  return out;
}

Vocab build_tag_vocab(const std::vector<TagSequence>& sequences, std::size_t min_freq) {
  std::vector<std::string> all;
  for (const TagSequence& seq : sequences) {
    if (seq.scheme != sequences.front().scheme) throw ContractError("build_tag_vocab: mixed tag schemes");
    all.insert(all.end(), seq.labels.begin(), seq.labels.end());
  }
  return Vocab::build(all, min_freq);
}

TaggedCorpus make_tagged_corpus(const Treebank& treebank, TagScheme scheme, const TagOptions& options) {
  TaggedCorpus c;
  c.scheme = scheme;
  c.sentences = treebank.sentences;
  c.tags = derive_treebank_tags(treebank, scheme, options);
  return c;
}

std::string write_tag_tsv(const TaggedCorpus& corpus) {
  std::ostringstream out;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& toks = corpus.sentences[s].tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) out << toks[i].form << '\t' << corpus.tags[s].labels[i] << '\n';
    out << '\n';
  }
  return out.str();
}

TaggedCorpus parse_tag_tsv(std::string_view text, TagScheme scheme) {
  TaggedCorpus c;
  c.scheme = scheme;
  Sentence cur;
  TagSequence tags{scheme, {}};
  auto flush = [&] {
    if (cur.tokens.empty()) return;
    c.sentences.push_back(std::move(cur));
    c.tags.push_back(std::move(tags));
    cur = Sentence{};
    tags = TagSequence{scheme, {}};
  };
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw ParseError("expected 2 tab-separated columns", line_no);
    }
    Token t;
    t.id = static_cast<int>(cur.tokens.size()) + 1;
    t.form = line.substr(0, tab);
    cur.tokens.push_back(std::move(t));
    tags.labels.emplace_back(line.substr(tab + 1));
  }
  flush();
  return c;
}

}  // namespace lcm
