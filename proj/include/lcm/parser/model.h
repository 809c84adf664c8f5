#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcm/nn/gated.h"
#include "lcm/parser/mst.h"
#include "lcm/parser/tree.h"

namespace lcm::parser {

using ad::ParameterStore;
using ad::Tensor;
using nn::Mode;

struct ParserConfig {
  nn::EncoderConfig encoder;
  std::size_t arc_mlp = 128;
  std::size_t label_mlp = 64;
  nn::GateVariant gate_variant = nn::GateVariant::kScalarSoftmax;
  std::vector<nn::AuxEncoderSpec> aux;
  // Adapters after these layers of the main encoder.
  std::vector<std::size_t> adapters_after;
  std::size_t adapter_bottleneck = 256;
  bool single_root = true;
  // Auxiliary token-tagging head on the encoder output (multi-task training).
  bool tag_head = false;
  std::size_t head_fc1 = 128;
  std::size_t head_fc2 = 64;
};

nlohmann::json to_json(const ParserConfig& c);
ParserConfig parser_config_from_json(const nlohmann::json& j);

// Biaffine graph-based parser over a (possibly gated) BiLSTM encoder.
class BiaffineParser {
 public:
  BiaffineParser(ParserConfig config, nn::EncoderVocabs vocabs, std::vector<std::string> relations,
                 std::uint64_t seed, Vocab head_tags = Vocab());
  BiaffineParser(BiaffineParser&&) = default;
  BiaffineParser& operator=(BiaffineParser&&) = default;

  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }
  const ParserConfig& config() const { return config_; }
  const std::vector<std::string>& relations() const { return relations_; }
  int relation_index(const std::string& relation) const;  // -1 if unknown
  const Vocab& head_tags() const { return head_tags_; }
  nn::GatedEncoder& encoder() { return encoder_; }
  const nn::GatedEncoder& encoder() const { return encoder_; }
  bool uses_tags() const { return config_.encoder.tag_dim > 0; }

  // [(n+1) x d] with ROOT at row 0.
  Tensor encode(const Sentence& sentence, Mode mode, const Rng& rng,
                const std::vector<std::string>* tags = nullptr) const;
  // [n x (n+1)]: row d-1 holds the scores of every head for dependent d,
  // with the self-attachment cell at -inf.
  Tensor arc_logits(const Tensor& encoded, Mode mode, const Rng& rng) const;
  // [n x R] relation logits given one head per dependent.
  Tensor label_logits(const Tensor& encoded, const std::vector<int>& heads, Mode mode, const Rng& rng) const;
  // [n x |head_tags|] logits of the auxiliary tagging head.
  Tensor tag_logits(const Tensor& encoded, Mode mode, const Rng& rng) const;

  // Arc cross-entropy plus label cross-entropy given gold heads, each a mean
  // over dependents; plus tag_weight times the tagging loss when the tag head
  // is present and targets are given.
  Tensor loss(const Sentence& sentence, Mode mode, const Rng& rng, const std::vector<std::string>* tags = nullptr,
              double tag_weight = 0.0, const std::vector<int>* tag_targets = nullptr) const;

  ParseTree predict(const Sentence& sentence, const std::vector<std::string>* tags = nullptr) const;
  // Predicted auxiliary tags (tag head only).
  std::vector<std::string> predict_tags(const Sentence& sentence, const std::vector<std::string>* tags = nullptr) const;

  // Binary checkpoint at `path` and a JSON sidecar at `path` + ".json".
  void save(const std::string& path) const;
  static BiaffineParser load(const std::string& path);
  nlohmann::json sidecar() const;

 private:
  struct Reps {
    Tensor arc_dep, arc_head, label_dep, label_head;
  };
  Reps reps(const Tensor& encoded, Mode mode, const Rng& rng) const;
  Tensor arc_from_reps(const Reps& r) const;
  Tensor label_from_reps(const Reps& r, const std::vector<int>& heads) const;

  ParserConfig config_;
  std::vector<std::string> relations_;
  Vocab head_tags_;
  ParameterStore store_;
  nn::GatedEncoder encoder_;
  nn::Linear arc_dep_, arc_head_, label_dep_, label_head_;
  nn::ArcBiaffine arc_;
  nn::LabelBiaffine label_;
  std::optional<nn::MlpHead> tag_head_;
};

ArcScores score_arcs(const Tensor& encoded, const BiaffineParser& model);
Tensor score_labels(const Tensor& encoded, const std::vector<int>& heads, const BiaffineParser& model);
Tensor parser_loss(const Sentence& sentence, const BiaffineParser& model, const Rng& rng);
ParseTree predict(const Sentence& sentence, const BiaffineParser& model);

std::vector<std::string> relation_inventory(const Treebank& treebank);

}  // namespace lcm::parser
