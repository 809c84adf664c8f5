#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lcm/conllu.h"
#include "lcm/vocab.h"

namespace lcm {

enum class TagScheme { MT, CT, LT, RD, NC, RP, LM, CP, HW, PHW, NT, PT, GT };

inline constexpr TagScheme kAllSchemes[] = {TagScheme::MT, TagScheme::CT, TagScheme::LT, TagScheme::RD, TagScheme::NC,
                                            TagScheme::RP, TagScheme::LM, TagScheme::CP, TagScheme::HW, TagScheme::PHW,
                                            TagScheme::NT, TagScheme::PT, TagScheme::GT};

std::string_view scheme_name(TagScheme scheme);
std::optional<TagScheme> scheme_from_name(std::string_view name);
// True for schemes read off the gold tree (LT, RD, NC, RP, HW, PHW).
bool scheme_uses_tree(TagScheme scheme);
// Default minimum label frequency: 2 for the open-vocabulary schemes (LM, HW),
// 1 otherwise.
std::size_t default_min_freq(TagScheme scheme);

struct TagOptions {
  int cap_depth = 7;
  int cap_children = 7;
};

struct TagSequence {
  TagScheme scheme = TagScheme::CT;
  std::vector<std::string> labels;

  bool operator==(const TagSequence&) const = default;
};

TagSequence derive_tags(const Sentence& sentence, TagScheme scheme, const TagOptions& options = {});
std::vector<TagSequence> derive_treebank_tags(const Treebank& treebank, TagScheme scheme,
                                              const TagOptions& options = {});

Vocab build_tag_vocab(const std::vector<TagSequence>& sequences, std::size_t min_freq);

// Sentences paired with one label per token; the unit of tagger training.
struct TaggedCorpus {
  TagScheme scheme = TagScheme::CT;
  std::vector<Sentence> sentences;
  std::vector<TagSequence> tags;

  std::size_t size() const { return sentences.size(); }
};

TaggedCorpus make_tagged_corpus(const Treebank& treebank, TagScheme scheme, const TagOptions& options = {});

// Two-column TSV: form TAB label, blank line between sentences.
std::string write_tag_tsv(const TaggedCorpus& corpus);
TaggedCorpus parse_tag_tsv(std::string_view text, TagScheme scheme);

}  // namespace lcm
