#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcm/eval/eval.h"
#include "lcm/nn/layers.h"
#include "lcm/nn/encoder.h"
#include "lcm/tagschemes.h"

namespace lcm::pipelines {

enum class Profile { kPaper, kDesk };

std::string profile_name(Profile p);
Profile profile_from_name(const std::string& name);

struct TrainConfig {
  Profile profile = Profile::kPaper;
  std::size_t batch_size = 16;
  std::size_t epochs = 100;
  std::size_t tagger_epochs = 100;
  double lr = 0.002;
  double dropout = 0.33;
  std::uint64_t seed = 1;
  nn::EncoderConfig encoder;
  std::size_t arc_mlp = 128;
  std::size_t label_mlp = 64;
  std::size_t fc1 = 128;
  std::size_t fc2 = 64;
  std::size_t min_word_freq = 2;
  std::size_t tag_dim = 64;              // morphological-tag input width
  std::size_t adapter_bottleneck = 256;
  std::size_t unfreeze_interval = 20;    // epochs between unfreezing steps
  double lr_decay_factor = 1.2;          // per layer, top to bottom
  double mtl_lambda = 1.0;
  bool freeze_pretrained = false;
  bool warm_start = false;               // self-training ensemble starts from the base encoder
  bool single_root = true;
  bool disable_aux_gates = false;        // diagnostic: auxiliary gate scores forced to -inf
  nn::GateVariant gate_variant = nn::GateVariant::kScalarSoftmax;
  eval::PunctPolicy punct = eval::PunctPolicy::kInclude;
  std::size_t extra_sentences = 1000;    // cap on extra data used; 0 = all

  static TrainConfig paper();
  static TrainConfig desk();
  void validate() const;
  // The encoder with the configured dropout.
  nn::EncoderConfig encoder_config() const;
};

nlohmann::json to_json(const TrainConfig& c);
// Keys present in `j` override `base`; unknown keys raise ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base);

enum class Variant {
  kBase,
  kOracleMi,
  kPredictedMi,
  kMtl,
  kTranSeqFe,
  kTranSeqFea,
  kTranSeqUf,
  kTranSeqDl,
  kTranSeqFt,
  kLcm,
  kDcst,
  kDcstLcm,
  kBaseStar,
};

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);
std::vector<std::string> variant_names();

enum class Family { kBiaff, kDcst };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct PipelineSpec {
  Variant variant = Variant::kBase;
  Family family = Family::kBiaff;
  std::string train, dev, test, extra;  // CoNLL-U paths
  std::vector<TagScheme> schemes;       // gate roster; empty = variant default
  std::string hier_checkpoint;          // pretrained hierarchical tagger (TranSeq)
  std::string tags_file;                // externally predicted test tags (Predicted MI)
  std::string word_vectors;             // pretrained word vectors
  std::string run_name;                 // defaults to the variant name

  // Default gating schemes per variant.
  std::vector<TagScheme> effective_schemes() const;
  std::string name() const { return run_name.empty() ? variant_name(variant) : run_name; }
};

nlohmann::json to_json(const PipelineSpec& s);
PipelineSpec pipeline_spec_from_json(const nlohmann::json& j, PipelineSpec base = {});

}  // namespace lcm::pipelines
