#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcm {

using Feats = std::map<std::string, std::string>;

struct Token {
  int id = 0;
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  Feats feats;
  int head = 0;
  std::string deprel = "_";
  std::string deps = "_";
  std::string misc = "_";

  bool operator==(const Token&) const = default;
};

// A line that is kept verbatim but never parsed or scored: multiword-token
// ranges (`1-2`) and empty nodes (`1.1`). `before` is the number of regular
// tokens preceding it.
struct OpaqueLine {
  std::size_t before = 0;
  std::string text;

  bool operator==(const OpaqueLine&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::optional<std::string> sent_id;
  std::vector<std::string> comments;  // full lines including the leading '#'
  std::vector<OpaqueLine> opaque;

  std::size_t size() const { return tokens.size(); }
  std::vector<int> heads() const;
  std::vector<std::string> deprels() const;

  bool operator==(const Sentence&) const = default;
};

struct Treebank {
  std::vector<Sentence> sentences;
  std::string name;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  std::size_t token_count() const;

  bool operator==(const Treebank&) const = default;
};

// `Key=Val|Key=Val` in key order, `_` when empty.
std::string format_feats(const Feats& feats);
Feats parse_feats(std::string_view text);

Treebank parse_conllu(std::string_view text, std::string name = "");
std::string write_conllu(const Treebank& treebank);

Treebank read_conllu_file(const std::string& path);
void write_conllu_file(const Treebank& treebank, const std::string& path);

enum class TreeViolation { kNone, kSelfLoop, kHeadOutOfRange, kNoRoot, kMultiRoot, kCycle };

struct TreeCheck {
  TreeViolation violation = TreeViolation::kNone;
  // Offending token ids: the self-looping token, the root tokens, or the
  // members of the cycle in ascending order.
  std::vector<int> nodes;

  bool ok() const { return violation == TreeViolation::kNone; }
  std::string describe() const;
};

// heads[i] is the head of token i+1; 0 denotes the synthetic root.
TreeCheck validate_heads(std::span<const int> heads);
TreeCheck validate_tree(const Sentence& sentence);

}  // namespace lcm
