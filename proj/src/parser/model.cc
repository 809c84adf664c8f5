#include "lcm/parser/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "lcm/autodiff/checkpoint.h"
#include "lcm/error.h"
#include "lcm/nn/serialize.h"

namespace lcm::parser {

using namespace lcm::ad;
using nlohmann::json;

json to_json(const ParserConfig& c) {
  json aux = json::array();
  for (const auto& a : c.aux) aux.push_back(nn::to_json(a));
  return {{"encoder", nn::to_json(c.encoder)},
          {"arc_mlp", c.arc_mlp},
          {"label_mlp", c.label_mlp},
          {"gate_variant", nn::gate_variant_name(c.gate_variant)},
          {"aux", aux},
          {"adapters_after", c.adapters_after},
          {"adapter_bottleneck", c.adapter_bottleneck},
          {"single_root", c.single_root},
          {"tag_head", c.tag_head},
          {"head_fc1", c.head_fc1},
          {"head_fc2", c.head_fc2}};
}

ParserConfig parser_config_from_json(const json& j) {
  ParserConfig c;
  c.encoder = nn::encoder_config_from_json(j.at("encoder"));
  c.arc_mlp = j.at("arc_mlp").get<std::size_t>();
  c.label_mlp = j.at("label_mlp").get<std::size_t>();
  c.gate_variant = nn::gate_variant_from_name(j.at("gate_variant").get<std::string>());
  for (const auto& a : j.at("aux")) c.aux.push_back(nn::aux_spec_from_json(a));
  c.adapters_after = j.at("adapters_after").get<std::vector<std::size_t>>();
  c.adapter_bottleneck = j.at("adapter_bottleneck").get<std::size_t>();
  c.single_root = j.at("single_root").get<bool>();
  c.tag_head = j.at("tag_head").get<bool>();
  c.head_fc1 = j.at("head_fc1").get<std::size_t>();
  c.head_fc2 = j.at("head_fc2").get<std::size_t>();
  return c;
}

BiaffineParser::BiaffineParser(ParserConfig config, nn::EncoderVocabs vocabs, std::vector<std::string> relations,
                               std::uint64_t seed, Vocab head_tags)
    : config_(std::move(config)), relations_(std::move(relations)), head_tags_(std::move(head_tags)), store_(seed) {
  if (relations_.empty()) throw ConfigError("parser needs at least one relation");
  if (config_.arc_mlp == 0 || config_.label_mlp == 0) throw ConfigError("parser MLP widths must be at least 1");
  encoder_ = nn::GatedEncoder(store_, config_.encoder, std::move(vocabs), config_.aux, config_.gate_variant);
  if (!config_.adapters_after.empty()) {
    encoder_.main.add_adapters(store_, config_.adapters_after, config_.adapter_bottleneck);
  }
  const std::size_t d = encoder_.output_dim();
  arc_dep_ = nn::Linear(store_, "arc_dep", d, config_.arc_mlp);
  arc_head_ = nn::Linear(store_, "arc_head", d, config_.arc_mlp);
  label_dep_ = nn::Linear(store_, "label_dep", d, config_.label_mlp);
  label_head_ = nn::Linear(store_, "label_head", d, config_.label_mlp);
  arc_ = nn::ArcBiaffine(store_, "arc", config_.arc_mlp);
  label_ = nn::LabelBiaffine(store_, "label", config_.label_mlp, relations_.size());
  if (config_.tag_head) {
    if (head_tags_.content_size() == 0) throw ConfigError("tagging head needs a non-empty tag vocabulary");
    tag_head_.emplace(store_, "tag_head", d, config_.head_fc1, config_.head_fc2, head_tags_.size());
  }
}

int BiaffineParser::relation_index(const std::string& relation) const {
  auto it = std::find(relations_.begin(), relations_.end(), relation);
  return it == relations_.end() ? -1 : static_cast<int>(it - relations_.begin());
}

Tensor BiaffineParser::encode(const Sentence& sentence, Mode mode, const Rng& rng,
                              const std::vector<std::string>* tags) const {
  return encoder_.encode(sentence, mode, rng, tags);
}

BiaffineParser::Reps BiaffineParser::reps(const Tensor& encoded, Mode mode, const Rng& rng) const {
  const double p = config_.encoder.dropout;
  const bool train = nn::training(mode);
  auto mlp = [&](const nn::Linear& layer, const char* name) {
    Rng r = rng.split(name);
    return dropout(relu(layer(encoded)), p, train, r);
  };
  return {mlp(arc_dep_, "arc_dep"), mlp(arc_head_, "arc_head"), mlp(label_dep_, "label_dep"),
          mlp(label_head_, "label_head")};
}

Tensor BiaffineParser::arc_from_reps(const Reps& r) const {
  const std::size_t n = r.arc_dep.rows() - 1;
  Tensor dep = slice(r.arc_dep, 0, 1, n + 1);
  Tensor s = arc_(dep, r.arc_head);  // [n x (n+1)]
  Tensor mask = Tensor::zeros({n, n + 1});
  for (std::size_t d = 1; d <= n; ++d) mask.mutable_data()[(d - 1) * (n + 1) + d] = kMasked;
  return add(s, mask);
}

Tensor BiaffineParser::label_from_reps(const Reps& r, const std::vector<int>& heads) const {
  const std::size_t n = r.label_dep.rows() - 1;
  if (heads.size() != n) throw ContractError("score_labels: expected one head per token");
  for (int h : heads) {
    if (h < 0 || static_cast<std::size_t>(h) > n) {
      throw ContractError("score_labels: head index " + std::to_string(h) + " out of range");
    }
  }
  Tensor dep = slice(r.label_dep, 0, 1, n + 1);
  Tensor head = embedding_lookup(r.label_head, heads);
  return label_(dep, head);
}

Tensor BiaffineParser::arc_logits(const Tensor& encoded, Mode mode, const Rng& rng) const {
  return arc_from_reps(reps(encoded, mode, rng));
}

Tensor BiaffineParser::label_logits(const Tensor& encoded, const std::vector<int>& heads, Mode mode,
                                    const Rng& rng) const {
  return label_from_reps(reps(encoded, mode, rng), heads);
}

Tensor BiaffineParser::tag_logits(const Tensor& encoded, Mode mode, const Rng& rng) const {
  if (!tag_head_) throw ContractError("parser has no tagging head");
  Rng r = rng.split("tag_head");
  Tensor tokens = slice(encoded, 0, 1, encoded.rows());
  return (*tag_head_)(tokens, config_.encoder.dropout, nn::training(mode), r);
}

Tensor BiaffineParser::loss(const Sentence& sentence, Mode mode, const Rng& rng, const std::vector<std::string>* tags,
                            double tag_weight, const std::vector<int>* tag_targets) const {
  if (sentence.size() == 0) throw ContractError("parser loss on an empty sentence");
  Tensor h = encode(sentence, mode, rng, tags);
  Reps r = reps(h, mode, rng);
  const std::vector<int> heads = sentence.heads();
  std::vector<int> labels;
  labels.reserve(heads.size());
  for (const Token& t : sentence.tokens) labels.push_back(relation_index(t.deprel));
  Tensor total = add(cross_entropy_rows(arc_from_reps(r), heads), cross_entropy_rows(label_from_reps(r, heads), labels));
  if (tag_head_ && tag_targets) {
    total = add(total, scale(cross_entropy_rows(tag_logits(h, mode, rng), *tag_targets), tag_weight));
  }
  if (!std::isfinite(total.item())) {
    throw NumericError("non-finite parser loss on sentence " + sentence.sent_id.value_or("(no sent_id)"));
  }
  return total;
}

ParseTree BiaffineParser::predict(const Sentence& sentence, const std::vector<std::string>* tags) const {
  const std::size_t n = sentence.size();
  if (n == 0) return {};
  const Rng rng(0);
  Tensor h = encode(sentence, Mode::kEval, rng, tags);
  Reps r = reps(h, Mode::kEval, rng);
  Tensor s = arc_from_reps(r);
  const ArcScores scores =
      ArcScores::from_dep_major(n, std::vector<double>(s.data().begin(), s.data().end()));
  ParseTree tree;
  tree.heads = decode_mst(scores, config_.single_root);
  Tensor logits = label_from_reps(r, tree.heads);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < relations_.size(); ++k) {
      if (logits.at(i, k) > logits.at(i, best)) best = k;
    }
    tree.labels.push_back(relations_[best]);
  }
  return tree;
}

std::vector<std::string> BiaffineParser::predict_tags(const Sentence& sentence,
                                                      const std::vector<std::string>* tags) const {
  const Rng rng(0);
  Tensor logits = tag_logits(encode(sentence, Mode::kEval, rng, tags), Mode::kEval, rng);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.cols(); ++k) {
      if (logits.at(i, k) > logits.at(i, best)) best = k;
    }
    out.push_back(head_tags_.symbol(static_cast<int>(best)));
  }
  return out;
}

json BiaffineParser::sidecar() const {
  return {{"kind", "biaffine-parser"},
          {"seed", store_.seed()},
          {"config", to_json(config_)},
          {"vocabs", nn::to_json(encoder_.main.vocabs())},
          {"relations", relations_},
          {"head_tags", nn::to_json(head_tags_)},
          {"roster", encoder_.roster()}};
}

void BiaffineParser::save(const std::string& path) const {
  save_checkpoint(store_, path);
  std::ofstream out(path + ".json", std::ios::binary);
  if (!out) throw DataError("cannot write " + path + ".json");
  out << sidecar().dump(2) << "\n";
}

BiaffineParser BiaffineParser::load(const std::string& path) {
  std::ifstream in(path + ".json", std::ios::binary);
  if (!in) throw CheckpointError("missing model sidecar " + path + ".json");
  json j;
  try {
    j = json::parse(in);
    if (j.at("kind") != "biaffine-parser") throw CheckpointError(path + " is not a parser checkpoint");
    BiaffineParser model(parser_config_from_json(j.at("config")), nn::encoder_vocabs_from_json(j.at("vocabs")),
                         j.at("relations").get<std::vector<std::string>>(), j.at("seed").get<std::uint64_t>(),
                         nn::vocab_from_json(j.at("head_tags")));
    load_checkpoint(model.store(), path);
    return model;
  } catch (const json::exception& e) {
    throw CheckpointError("malformed sidecar " + path + ".json: " + e.what());
  }
}

ArcScores score_arcs(const Tensor& encoded, const BiaffineParser& model) {
  Tensor s = model.arc_logits(encoded, Mode::kEval, Rng(0));
  const std::size_t n = encoded.rows() - 1;
  return ArcScores::from_dep_major(n, std::vector<double>(s.data().begin(), s.data().end()));
}

Tensor score_labels(const Tensor& encoded, const std::vector<int>& heads, const BiaffineParser& model) {
  return model.label_logits(encoded, heads, Mode::kEval, Rng(0));
}

Tensor parser_loss(const Sentence& sentence, const BiaffineParser& model, const Rng& rng) {
  return model.loss(sentence, Mode::kTrain, rng);
}

ParseTree predict(const Sentence& sentence, const BiaffineParser& model) { return model.predict(sentence); }

std::vector<std::string> relation_inventory(const Treebank& treebank) {
  std::set<std::string> rels;
  for (const auto& s : treebank.sentences) {
    for (const auto& t : s.tokens) rels.insert(t.deprel);
  }
  return {rels.begin(), rels.end()};
}

}  // namespace lcm::parser
