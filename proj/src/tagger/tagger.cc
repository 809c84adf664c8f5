#include "lcm/tagger/tagger.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "lcm/autodiff/checkpoint.h"
#include "lcm/error.h"
#include "lcm/nn/serialize.h"

namespace lcm::tagger {

using namespace lcm::ad;
using nlohmann::json;

json to_json(const TaggerConfig& c) {
  return {{"encoder", nn::to_json(c.encoder)}, {"fc1", c.fc1}, {"fc2", c.fc2}};
}

TaggerConfig tagger_config_from_json(const json& j) {
  TaggerConfig c;
  c.encoder = nn::encoder_config_from_json(j.at("encoder"));
  c.fc1 = j.at("fc1").get<std::size_t>();
  c.fc2 = j.at("fc2").get<std::size_t>();
  return c;
}

namespace {

std::vector<int> label_ids(const Vocab& vocab, const std::vector<std::string>& labels) {
  std::vector<int> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) ids.push_back(vocab.lookup(l));
  return ids;
}

std::string argmax_label(const Tensor& logits, std::size_t row, const Vocab& vocab) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < logits.cols(); ++k) {
    if (logits.at(row, k) > logits.at(row, best)) best = k;
  }
  return vocab.symbol(static_cast<int>(best));
}

void write_sidecar(const std::string& path, const json& j) {
  std::ofstream out(path + ".json", std::ios::binary);
  if (!out) throw DataError("cannot write " + path + ".json");
  out << j.dump(2) << "\n";
}

json read_sidecar(const std::string& path, const std::string& kind) {
  std::ifstream in(path + ".json", std::ios::binary);
  if (!in) throw CheckpointError("missing model sidecar " + path + ".json");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CheckpointError("malformed sidecar " + path + ".json: " + e.what());
  }
  if (j.value("kind", "") != kind) throw CheckpointError(path + " is not a " + kind + " checkpoint");
  return j;
}

nn::EncoderVocabs vocabs_for(const std::vector<Sentence>& sentences, std::size_t min_word_freq) {
  std::vector<const Sentence*> ptrs;
  for (const auto& s : sentences) ptrs.push_back(&s);
  return nn::EncoderVocabs::build(ptrs, min_word_freq);
}

// Shared epoch loop: shuffled mini-batches, Adam, selection on a dev score.
template <class LossFn, class DevFn>
TrainHistory run_epochs(ParameterStore& store, std::size_t n, const TrainOptions& options, LossFn loss_of,
                        DevFn dev_score, bool has_dev) {
  if (n == 0) throw ConfigError("tagger training set is empty");
  if (options.batch_size == 0 || options.epochs == 0) throw ConfigError("batch size and epochs must be positive");
  const Rng root(options.seed);
  const Rng shuffle_rng = root.split("shuffle");
  const Rng dropout_rng = root.split("dropout");
  TrainHistory history;
  Snapshot best;
  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng r = shuffle_rng.split(epoch);
    r.shuffle(order);
    const Rng epoch_dropout = dropout_rng.split(epoch);
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t begin = 0; begin < n; begin += options.batch_size) {
      const std::size_t end = std::min(n, begin + options.batch_size);
      Tensor batch;
      for (std::size_t k = begin; k < end; ++k) {
        Tensor l = loss_of(order[k], epoch_dropout.split(order[k]));
        if (!l.defined()) continue;
        if (!std::isfinite(l.item())) {
          throw NumericError("non-finite tagger loss on training sentence " + std::to_string(order[k]));
        }
        total += l.item();
        ++counted;
        batch = batch.defined() ? add(batch, l) : l;
      }
      if (!batch.defined()) continue;
      batch = scale(batch, 1.0 / static_cast<double>(end - begin));
      if (batch.requires_grad()) backward(batch);
      adam_step(store, options.adam);
    }
    history.train_loss.push_back(counted ? total / static_cast<double>(counted) : 0.0);
    bool improved = true;
    if (has_dev) {
      const double acc = dev_score();
      history.dev_accuracy.push_back(acc);
      improved = acc > history.best_dev_accuracy;
      if (improved) history.best_dev_accuracy = acc;
    }
    if (improved) {
      history.best_epoch = epoch;
      best = store.snapshot();
    }
    if (options.log) {
      char buf[128];
      if (has_dev) {
        std::snprintf(buf, sizeof buf, "epoch %zu loss %.4f dev acc %.4f", epoch + 1, history.train_loss.back(),
                      history.dev_accuracy.back());
      } else {
        std::snprintf(buf, sizeof buf, "epoch %zu loss %.4f", epoch + 1, history.train_loss.back());
      }
      options.log(buf);
    }
  }
  store.restore(best);
  return history;
}

}  // namespace

TaggerModel::TaggerModel(TaggerConfig config, TagScheme scheme, nn::EncoderVocabs vocabs, Vocab tags,
                         std::uint64_t seed)
    : config_(config), scheme_(scheme), tags_(std::move(tags)), store_(seed) {
  if (tags_.content_size() == 0) throw ConfigError("tagger needs a non-empty tag vocabulary");
  encoder_ = nn::Encoder(store_, "enc.", config_.encoder, std::move(vocabs));
  head_ = nn::MlpHead(store_, "head", encoder_.output_dim(), config_.fc1, config_.fc2, tags_.size());
}

Tensor TaggerModel::logits(const Sentence& sentence, Mode mode, const Rng& rng) const {
  Tensor h = encoder_.encode(sentence, mode, rng).top;
  Rng r = rng.split("head");
  return head_(slice(h, 0, 1, h.rows()), config_.encoder.dropout, nn::training(mode), r);
}

Tensor TaggerModel::loss(const Sentence& sentence, const std::vector<std::string>& labels, Mode mode,
                         const Rng& rng) const {
  if (labels.size() != sentence.size()) throw ContractError("tagger loss: one label per token expected");
  if (sentence.size() == 0) return {};
  return cross_entropy_rows(logits(sentence, mode, rng), label_ids(tags_, labels));
}

std::vector<std::string> TaggerModel::predict(const Sentence& sentence) const {
  if (sentence.size() == 0) return {};
  Tensor l = logits(sentence, Mode::kEval, Rng(0));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < l.rows(); ++i) out.push_back(argmax_label(l, i, tags_));
  return out;
}

void TaggerModel::save(const std::string& path) const {
  save_checkpoint(store_, path);
  write_sidecar(path, {{"kind", "tagger"},
                       {"seed", store_.seed()},
                       {"scheme", std::string(scheme_name(scheme_))},
                       {"config", to_json(config_)},
                       {"vocabs", nn::to_json(encoder_.vocabs())},
                       {"tags", nn::to_json(tags_)}});
}

TaggerModel TaggerModel::load(const std::string& path) {
  const json j = read_sidecar(path, "tagger");
  try {
    const auto scheme = scheme_from_name(j.at("scheme").get<std::string>());
    if (!scheme) throw CheckpointError("unknown scheme in " + path + ".json");
    TaggerModel m(tagger_config_from_json(j.at("config")), *scheme, nn::encoder_vocabs_from_json(j.at("vocabs")),
                  nn::vocab_from_json(j.at("tags")), j.at("seed").get<std::uint64_t>());
    load_checkpoint(m.store(), path);
    return m;
  } catch (const json::exception& e) {
    throw CheckpointError("malformed sidecar " + path + ".json: " + e.what());
  }
}

Tensor tagger_forward(const Sentence& sentence, const TaggerModel& model, Mode mode, const Rng& rng) {
  return softmax(model.logits(sentence, mode, rng), 1);
}

std::vector<TagSequence> predict_tags(const TaggerModel& model, const std::vector<Sentence>& sentences) {
  std::vector<TagSequence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back({model.scheme(), model.predict(s)});
  return out;
}

TaggerModel train_tagger(const TaggedCorpus& train, const TaggedCorpus* dev, const TaggerConfig& config,
                         const TrainOptions& options, TrainHistory* history, std::size_t min_word_freq) {
  if (train.size() == 0) throw ConfigError("tagger training set is empty");
  Vocab tags = build_tag_vocab(train.tags, default_min_freq(train.scheme));
  if (tags.content_size() == 0) throw ConfigError("tag vocabulary is empty");
  TaggerModel model(config, train.scheme, vocabs_for(train.sentences, min_word_freq), std::move(tags),
                    options.seed);
  const bool has_dev = dev && dev->size() > 0;
  auto loss_of = [&](std::size_t i, const Rng& rng) {
    return model.loss(train.sentences[i], train.tags[i].labels, Mode::kTrain, rng);
  };
  auto dev_score = [&] { return tag_metrics(predict_tags(model, dev->sentences), dev->tags).accuracy; };
  TrainHistory h = run_epochs(model.store(), train.size(), options, loss_of, dev_score, has_dev);
  if (history) *history = std::move(h);
  return model;
}

TagMetrics tag_metrics(const std::vector<TagSequence>& pred, const std::vector<TagSequence>& gold) {
  if (pred.size() != gold.size()) throw ContractError("tag_metrics: sentence count mismatch");
  std::map<std::string, std::size_t> tp, fp, fn;
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i].labels;
    const auto& p = pred[i].labels;
    if (g.size() != p.size()) throw ContractError("tag_metrics: token count mismatch in sentence " + std::to_string(i));
    for (std::size_t t = 0; t < g.size(); ++t) {
      ++total;
      fn[g[t]];  // every gold label takes part in the average
      if (g[t] == p[t]) {
        ++correct;
        ++tp[g[t]];
      } else {
        ++fp[p[t]];
        ++fn[g[t]];
      }
    }
  }
  if (fn.empty()) throw ContractError("tag_metrics: gold has no labels");
  double f1_sum = 0.0;
  for (const auto& [label, misses] : fn) {
    const double t = static_cast<double>(tp[label]);
    const double p = t + static_cast<double>(fp[label]);
    const double r = t + static_cast<double>(misses);
    const double precision = p > 0 ? t / p : 0.0;
    const double recall = r > 0 ? t / r : 0.0;
    f1_sum += precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  }
  return {static_cast<double>(correct) / static_cast<double>(total), f1_sum / static_cast<double>(fn.size())};
}

HierMorphTagger::HierMorphTagger(TaggerConfig config, nn::EncoderVocabs vocabs, std::vector<Vocab> task_tags,
                                 std::uint64_t seed)
    : config_(config), task_tags_(std::move(task_tags)), store_(seed) {
  config_.encoder.lstm_layers = kLayers;
  if (task_tags_.size() != kLayers) throw ConfigError("hierarchical tagger needs three tag vocabularies");
  encoder_ = nn::Encoder(store_, "enc.", config_.encoder, std::move(vocabs));
  for (std::size_t k = 0; k < kLayers; ++k) {
    if (task_tags_[k].content_size() == 0) throw ConfigError("hierarchical tagger: empty tag vocabulary");
    heads_.emplace_back(store_, "head." + std::string(scheme_name(kTasks[k])), encoder_.output_dim(), config_.fc1,
                        config_.fc2, task_tags_[k].size());
  }
}

std::vector<Tensor> HierMorphTagger::logits(const Sentence& sentence, Mode mode, const Rng& rng) const {
  const nn::Encoder::Output out = encoder_.encode(sentence, mode, rng);
  std::vector<Tensor> result;
  for (std::size_t k = 0; k < kLayers; ++k) {
    Rng r = rng.split("head").split(k);
    const Tensor& h = out.layers[k];
    result.push_back(heads_[k](slice(h, 0, 1, h.rows()), config_.encoder.dropout, nn::training(mode), r));
  }
  return result;
}

Tensor HierMorphTagger::loss(const Sentence& sentence, const std::vector<std::vector<std::string>>& labels, Mode mode,
                             const Rng& rng) const {
  if (labels.size() != kLayers) throw ContractError("hierarchical tagger loss: three label sequences expected");
  if (sentence.size() == 0) return {};
  const std::vector<Tensor> l = logits(sentence, mode, rng);
  Tensor total;
  for (std::size_t k = 0; k < kLayers; ++k) {
    if (labels[k].size() != sentence.size()) throw ContractError("hierarchical tagger loss: label count mismatch");
    Tensor t = cross_entropy_rows(l[k], label_ids(task_tags_[k], labels[k]));
    total = total.defined() ? add(total, t) : t;
  }
  return total;
}

std::vector<std::vector<std::string>> HierMorphTagger::predict(const Sentence& sentence) const {
  std::vector<std::vector<std::string>> out(kLayers);
  if (sentence.size() == 0) return out;
  const std::vector<Tensor> l = logits(sentence, Mode::kEval, Rng(0));
  for (std::size_t k = 0; k < kLayers; ++k) {
    for (std::size_t i = 0; i < l[k].rows(); ++i) out[k].push_back(argmax_label(l[k], i, task_tags_[k]));
  }
  return out;
}

void HierMorphTagger::save(const std::string& path) const {
  save_checkpoint(store_, path);
  json tags = json::array();
  for (const auto& v : task_tags_) tags.push_back(nn::to_json(v));
  write_sidecar(path, {{"kind", "hier-morph-tagger"},
                       {"seed", store_.seed()},
                       {"config", to_json(config_)},
                       {"vocabs", nn::to_json(encoder_.vocabs())},
                       {"task_tags", tags}});
}

HierMorphTagger HierMorphTagger::load(const std::string& path) {
  const json j = read_sidecar(path, "hier-morph-tagger");
  try {
    std::vector<Vocab> tags;
    for (const auto& t : j.at("task_tags")) tags.push_back(nn::vocab_from_json(t));
    HierMorphTagger m(tagger_config_from_json(j.at("config")), nn::encoder_vocabs_from_json(j.at("vocabs")),
                      std::move(tags), j.at("seed").get<std::uint64_t>());
    load_checkpoint(m.store(), path);
    return m;
  } catch (const json::exception& e) {
    throw CheckpointError("malformed sidecar " + path + ".json: " + e.what());
  }
}

std::vector<std::string> extract_layers(const HierMorphTagger& model) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < HierMorphTagger::kLayers; ++k) out.push_back(model.encoder().layer_prefix(k));
  return out;
}

std::vector<std::vector<std::vector<std::string>>> hier_labels(const Treebank& treebank) {
  std::vector<std::vector<std::vector<std::string>>> out(treebank.size());
  for (std::size_t i = 0; i < treebank.size(); ++i) {
    for (TagScheme s : HierMorphTagger::kTasks) out[i].push_back(derive_tags(treebank.sentences[i], s).labels);
  }
  return out;
}

std::vector<double> hier_accuracy(const HierMorphTagger& model, const Treebank& treebank) {
  const auto gold = hier_labels(treebank);
  std::vector<double> correct(HierMorphTagger::kLayers, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < treebank.size(); ++i) {
    const auto pred = model.predict(treebank.sentences[i]);
    total += static_cast<double>(treebank.sentences[i].size());
    for (std::size_t k = 0; k < HierMorphTagger::kLayers; ++k) {
      for (std::size_t t = 0; t < pred[k].size(); ++t) correct[k] += pred[k][t] == gold[i][k][t] ? 1.0 : 0.0;
    }
  }
  for (double& c : correct) c = total > 0 ? c / total : 0.0;
  return correct;
}

HierMorphTagger train_hier_morph_tagger(const Treebank& train, const Treebank* dev, const TaggerConfig& config,
                                        const TrainOptions& options, std::size_t min_word_freq) {
  if (train.size() == 0) throw ConfigError("hierarchical tagger training set is empty");
  const auto labels = hier_labels(train);
  std::vector<Vocab> vocabs;
  for (std::size_t k = 0; k < HierMorphTagger::kLayers; ++k) {
    std::vector<TagSequence> seqs;
    for (const auto& l : labels) seqs.push_back({HierMorphTagger::kTasks[k], l[k]});
    vocabs.push_back(build_tag_vocab(seqs, 1));
  }
  HierMorphTagger model(config, vocabs_for(train.sentences, min_word_freq), std::move(vocabs), options.seed);
  const bool has_dev = dev && dev->size() > 0;
  auto loss_of = [&](std::size_t i, const Rng& rng) {
    return model.loss(train.sentences[i], labels[i], Mode::kTrain, rng);
  };
  auto dev_score = [&] {
    const auto acc = hier_accuracy(model, *dev);
    return (acc[0] + acc[1] + acc[2]) / 3.0;
  };
  run_epochs(model.store(), train.size(), options, loss_of, dev_score, has_dev);
  return model;
}

}  // namespace lcm::tagger
