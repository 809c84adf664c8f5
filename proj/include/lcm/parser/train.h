#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lcm/autodiff/adam.h"
#include "lcm/eval/eval.h"
#include "lcm/parser/model.h"

namespace lcm::parser {

// A treebank plus the optional per-token inputs some variants need.
struct ParserCorpus {
  const Treebank* treebank = nullptr;
  std::vector<std::vector<std::string>> tags;      // encoder tag input, empty if unused
  std::vector<std::vector<int>> tag_targets;        // tagging-head targets, empty if unused

  std::size_t size() const { return treebank ? treebank->size() : 0; }
  const std::vector<std::string>* tags_of(std::size_t i) const { return tags.empty() ? nullptr : &tags[i]; }
  const std::vector<int>* targets_of(std::size_t i) const {
    return tag_targets.empty() ? nullptr : &tag_targets[i];
  }
};

using Logger = std::function<void(const std::string&)>;

struct ParserTrainOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  ad::AdamConfig adam;
  std::uint64_t seed = 1;
  double tag_weight = 0.0;
  eval::PunctPolicy punct = eval::PunctPolicy::kInclude;
  // Called before each epoch (0-based); used by schedules that change which
  // parameters train.
  std::function<void(std::size_t, BiaffineParser&)> on_epoch_start;
  Logger log;
};

struct ParserTrainHistory {
  std::vector<double> train_loss;
  std::vector<double> dev_uas;
  std::vector<double> dev_las;
  std::size_t best_epoch = 0;
  double best_dev_las = -1.0;
};

// Mini-batch Adam on the parser loss. After each epoch the dev set is parsed
// and the parameters with the best dev LAS (earliest on ties) are kept; with
// no dev set the last epoch wins.
ParserTrainHistory train_parser(BiaffineParser& model, const ParserCorpus& train, const ParserCorpus* dev,
                                const ParserTrainOptions& options);

std::vector<ParseTree> predict_corpus(const BiaffineParser& model, const ParserCorpus& corpus);
eval::AttachmentScore evaluate_parser(const BiaffineParser& model, const ParserCorpus& corpus,
                                      eval::PunctPolicy punct = eval::PunctPolicy::kInclude);

// Copies predicted heads and relations into the sentences.
Treebank apply_trees(const Treebank& treebank, const std::vector<ParseTree>& trees);

}  // namespace lcm::parser
