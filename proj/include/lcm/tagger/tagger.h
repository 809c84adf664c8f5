#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcm/autodiff/adam.h"
#include "lcm/nn/encoder.h"
#include "lcm/tagschemes.h"

namespace lcm::tagger {

using ad::ParameterStore;
using ad::Tensor;
using nn::Mode;

struct TaggerConfig {
  nn::EncoderConfig encoder;
  std::size_t fc1 = 128;
  std::size_t fc2 = 64;
};

nlohmann::json to_json(const TaggerConfig& c);
TaggerConfig tagger_config_from_json(const nlohmann::json& j);

// BiLSTM encoder followed by two ReLU layers and a softmax over tags. The
// encoder's parameters live under "enc." so they can be copied into a parser.
class TaggerModel {
 public:
  TaggerModel(TaggerConfig config, TagScheme scheme, nn::EncoderVocabs vocabs, Vocab tags, std::uint64_t seed);
  TaggerModel(TaggerModel&&) = default;
  TaggerModel& operator=(TaggerModel&&) = default;

  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }
  const TaggerConfig& config() const { return config_; }
  TagScheme scheme() const { return scheme_; }
  const Vocab& tags() const { return tags_; }
  const nn::Encoder& encoder() const { return encoder_; }

  Tensor logits(const Sentence& sentence, Mode mode, const Rng& rng) const;  // [n x |tags|]
  // Mean token cross-entropy; labels outside the vocabulary count as UNK.
  Tensor loss(const Sentence& sentence, const std::vector<std::string>& labels, Mode mode, const Rng& rng) const;
  std::vector<std::string> predict(const Sentence& sentence) const;

  void save(const std::string& path) const;
  static TaggerModel load(const std::string& path);

 private:
  TaggerConfig config_;
  TagScheme scheme_;
  Vocab tags_;
  ParameterStore store_;
  nn::Encoder encoder_;
  nn::MlpHead head_;
};

// Per-token tag distributions, ROOT excluded: [n x |tags|], rows sum to 1.
Tensor tagger_forward(const Sentence& sentence, const TaggerModel& model, Mode mode, const Rng& rng);

using Logger = std::function<void(const std::string&)>;

struct TrainOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  ad::AdamConfig adam;
  std::uint64_t seed = 1;
  Logger log;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> dev_accuracy;
  std::size_t best_epoch = 0;
  double best_dev_accuracy = -1.0;
};

// Vocabularies come from the training corpus. Model selection is by dev
// accuracy (earliest best epoch); without a dev set the last epoch wins.
TaggerModel train_tagger(const TaggedCorpus& train, const TaggedCorpus* dev, const TaggerConfig& config,
                         const TrainOptions& options, TrainHistory* history = nullptr,
                         std::size_t min_word_freq = 2);

std::vector<TagSequence> predict_tags(const TaggerModel& model, const std::vector<Sentence>& sentences);

struct TagMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

// Token accuracy and the unweighted mean F1 over labels present in gold.
TagMetrics tag_metrics(const std::vector<TagSequence>& pred, const std::vector<TagSequence>& gold);

// Three stacked BiLSTM layers, each feeding its own classifier: number after
// the first, gender after the second, case after the third.
class HierMorphTagger {
 public:
  static constexpr std::size_t kLayers = 3;
  static constexpr TagScheme kTasks[kLayers] = {TagScheme::NT, TagScheme::GT, TagScheme::CT};

  HierMorphTagger(TaggerConfig config, nn::EncoderVocabs vocabs, std::vector<Vocab> task_tags, std::uint64_t seed);
  HierMorphTagger(HierMorphTagger&&) = default;
  HierMorphTagger& operator=(HierMorphTagger&&) = default;

  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }
  const TaggerConfig& config() const { return config_; }
  const nn::Encoder& encoder() const { return encoder_; }
  const std::vector<Vocab>& task_tags() const { return task_tags_; }

  // Logits of each task, bottom first.
  std::vector<Tensor> logits(const Sentence& sentence, Mode mode, const Rng& rng) const;
  // Sum over tasks of the mean token cross-entropy.
  Tensor loss(const Sentence& sentence, const std::vector<std::vector<std::string>>& labels, Mode mode,
              const Rng& rng) const;
  std::vector<std::vector<std::string>> predict(const Sentence& sentence) const;

  void save(const std::string& path) const;
  static HierMorphTagger load(const std::string& path);

 private:
  TaggerConfig config_;
  std::vector<Vocab> task_tags_;
  ParameterStore store_;
  nn::Encoder encoder_;
  std::vector<nn::MlpHead> heads_;
};

// Parameter-name prefixes of the three BiLSTM layers, bottom first.
std::vector<std::string> extract_layers(const HierMorphTagger& model);

// Labels of the three tasks for every sentence, in kTasks order.
std::vector<std::vector<std::vector<std::string>>> hier_labels(const Treebank& treebank);

HierMorphTagger train_hier_morph_tagger(const Treebank& train, const Treebank* dev, const TaggerConfig& config,
                                        const TrainOptions& options, std::size_t min_word_freq = 2);

// Mean per-task accuracy of the three heads.
std::vector<double> hier_accuracy(const HierMorphTagger& model, const Treebank& treebank);

}  // namespace lcm::tagger
