#include "lcm/parser/train.h"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "lcm/error.h"

namespace lcm::parser {

using namespace lcm::ad;

std::vector<ParseTree> predict_corpus(const BiaffineParser& model, const ParserCorpus& corpus) {
  std::vector<ParseTree> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out.push_back(model.predict(corpus.treebank->sentences[i], corpus.tags_of(i)));
  }
  return out;
}

eval::AttachmentScore evaluate_parser(const BiaffineParser& model, const ParserCorpus& corpus,
                                      eval::PunctPolicy punct) {
  return eval::uas_las(*corpus.treebank, predict_corpus(model, corpus), punct);
}

Treebank apply_trees(const Treebank& treebank, const std::vector<ParseTree>& trees) {
  if (trees.size() != treebank.size()) throw ContractError("apply_trees: sentence count mismatch");
  Treebank out = treebank;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    auto& tokens = out.sentences[i].tokens;
    if (trees[i].heads.size() != tokens.size()) throw ContractError("apply_trees: token count mismatch");
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      tokens[t].head = trees[i].heads[t];
      tokens[t].deprel = trees[i].labels[t];
    }
  }
  return out;
}

ParserTrainHistory train_parser(BiaffineParser& model, const ParserCorpus& train, const ParserCorpus* dev,
                                const ParserTrainOptions& options) {
  if (train.size() == 0) throw ConfigError("parser training set is empty");
  if (options.batch_size == 0 || options.epochs == 0) throw ConfigError("batch size and epochs must be positive");
  const Rng root(options.seed);
  const Rng shuffle_rng = root.split("shuffle");
  const Rng dropout_rng = root.split("dropout");
  ParserTrainHistory history;
  Snapshot best;
  std::vector<std::size_t> order(train.size());

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    if (options.on_epoch_start) options.on_epoch_start(epoch, model);
    std::iota(order.begin(), order.end(), 0);
    Rng epoch_shuffle = shuffle_rng.split(epoch);
    epoch_shuffle.shuffle(order);
    const Rng epoch_dropout = dropout_rng.split(epoch);
    double epoch_loss = 0.0;
    std::size_t counted = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      Tensor batch_loss;
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t i = order[k];
        const Sentence& s = train.treebank->sentences[i];
        if (s.size() == 0) continue;
        Tensor l = model.loss(s, nn::Mode::kTrain, epoch_dropout.split(i), train.tags_of(i), options.tag_weight,
                              train.targets_of(i));
        epoch_loss += l.item();
        ++counted;
        batch_loss = batch_loss.defined() ? add(batch_loss, l) : l;
      }
      if (!batch_loss.defined()) continue;
      batch_loss = scale(batch_loss, 1.0 / static_cast<double>(end - begin));
      if (batch_loss.requires_grad()) backward(batch_loss);
      adam_step(model.store(), options.adam);
    }
    history.train_loss.push_back(counted ? epoch_loss / static_cast<double>(counted) : 0.0);

    bool improved = true;
    if (dev && dev->size() > 0) {
      const eval::AttachmentScore score = evaluate_parser(model, *dev, options.punct);
      history.dev_uas.push_back(score.uas);
      history.dev_las.push_back(score.las);
      improved = score.las > history.best_dev_las;
      if (improved) history.best_dev_las = score.las;
    }
    if (improved) {
      history.best_epoch = epoch;
      best = model.store().snapshot();
    }
    if (options.log) {
      char buf[160];
      if (dev && dev->size() > 0) {
        std::snprintf(buf, sizeof buf, "epoch %zu loss %.4f dev UAS %.2f LAS %.2f", epoch + 1,
                      history.train_loss.back(), history.dev_uas.back(), history.dev_las.back());
      } else {
        std::snprintf(buf, sizeof buf, "epoch %zu loss %.4f", epoch + 1, history.train_loss.back());
      }
      options.log(buf);
    }
  }
  model.store().restore(best);
  return history;
}

}  // namespace lcm::parser
