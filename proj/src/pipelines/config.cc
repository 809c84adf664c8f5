#include "lcm/pipelines/config.h"

#include <set>

#include "lcm/error.h"
#include "lcm/nn/serialize.h"

namespace lcm::pipelines {

using nlohmann::json;

std::string profile_name(Profile p) { return p == Profile::kPaper ? "paper" : "desk"; }

Profile profile_from_name(const std::string& name) {
  if (name == "paper") return Profile::kPaper;
  if (name == "desk") return Profile::kDesk;
  throw ConfigError("unknown profile '" + name + "' (expected paper or desk)");
}

TrainConfig TrainConfig::paper() { return TrainConfig{}; }

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.profile = Profile::kDesk;
  c.batch_size = 4;
  c.epochs = 40;
  c.tagger_epochs = 30;
  c.encoder.word_dim = 32;
  c.encoder.char_dim = 16;
  c.encoder.char_filters = 16;
  c.encoder.lstm_hidden = 64;
  c.tag_dim = 16;
  c.adapter_bottleneck = 32;
  c.unfreeze_interval = 8;
  return c;
}

void TrainConfig::validate() const {
  if (batch_size == 0 || epochs == 0 || tagger_epochs == 0) throw ConfigError("batch size and epochs must be positive");
  if (epochs > 100000) throw ConfigError("epochs out of range");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0,1)");
  if (arc_mlp == 0 || label_mlp == 0 || fc1 == 0 || fc2 == 0) throw ConfigError("MLP widths must be positive");
  if (tag_dim == 0 || adapter_bottleneck == 0 || unfreeze_interval == 0) {
    throw ConfigError("tag_dim, adapter_bottleneck and unfreeze_interval must be positive");
  }
  if (!(lr_decay_factor > 0.0)) throw ConfigError("lr_decay_factor must be positive");
  if (mtl_lambda < 0.0) throw ConfigError("mtl_lambda must be non-negative");
  encoder_config().validate();
}

nn::EncoderConfig TrainConfig::encoder_config() const {
  nn::EncoderConfig e = encoder;
  e.dropout = dropout;
  e.tag_dim = 0;
  return e;
}

json to_json(const TrainConfig& c) {
  json enc = nn::to_json(c.encoder);
  enc.erase("dropout");
  enc.erase("tag_dim");
  return {{"profile", profile_name(c.profile)},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"tagger_epochs", c.tagger_epochs},
          {"lr", c.lr},
          {"dropout", c.dropout},
          {"seed", c.seed},
          {"encoder", enc},
          {"arc_mlp", c.arc_mlp},
          {"label_mlp", c.label_mlp},
          {"fc1", c.fc1},
          {"fc2", c.fc2},
          {"min_word_freq", c.min_word_freq},
          {"tag_dim", c.tag_dim},
          {"adapter_bottleneck", c.adapter_bottleneck},
          {"unfreeze_interval", c.unfreeze_interval},
          {"lr_decay_factor", c.lr_decay_factor},
          {"mtl_lambda", c.mtl_lambda},
          {"freeze_pretrained", c.freeze_pretrained},
          {"warm_start", c.warm_start},
          {"single_root", c.single_root},
          {"disable_aux_gates", c.disable_aux_gates},
          {"gate_variant", nn::gate_variant_name(c.gate_variant)},
          {"punct", eval::punct_policy_name(c.punct)},
          {"extra_sentences", c.extra_sentences}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("training config must be a JSON object");
  if (j.contains("profile")) {
    const Profile p = profile_from_name(j["profile"].get<std::string>());
    c = p == Profile::kPaper ? TrainConfig::paper() : TrainConfig::desk();
  }
  static const std::set<std::string> known = {
      "profile", "batch_size", "epochs", "tagger_epochs", "lr", "dropout", "seed", "encoder", "arc_mlp",
      "label_mlp", "fc1", "fc2", "min_word_freq", "tag_dim", "adapter_bottleneck", "unfreeze_interval",
      "lr_decay_factor", "mtl_lambda", "freeze_pretrained", "warm_start", "single_root", "disable_aux_gates",
      "gate_variant", "punct", "extra_sentences"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown training config key '" + key + "'");
  }
  try {
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::remove_reference_t<decltype(field)>>();
    };
    take("batch_size", c.batch_size);
    take("epochs", c.epochs);
    take("tagger_epochs", c.tagger_epochs);
    take("lr", c.lr);
    take("dropout", c.dropout);
    take("seed", c.seed);
    take("arc_mlp", c.arc_mlp);
    take("label_mlp", c.label_mlp);
    take("fc1", c.fc1);
    take("fc2", c.fc2);
    take("min_word_freq", c.min_word_freq);
    take("tag_dim", c.tag_dim);
    take("adapter_bottleneck", c.adapter_bottleneck);
    take("unfreeze_interval", c.unfreeze_interval);
    take("lr_decay_factor", c.lr_decay_factor);
    take("mtl_lambda", c.mtl_lambda);
    take("freeze_pretrained", c.freeze_pretrained);
    take("warm_start", c.warm_start);
    take("single_root", c.single_root);
    take("disable_aux_gates", c.disable_aux_gates);
    take("extra_sentences", c.extra_sentences);
    if (j.contains("gate_variant")) c.gate_variant = nn::gate_variant_from_name(j["gate_variant"].get<std::string>());
    if (j.contains("punct")) c.punct = eval::punct_policy_from_name(j["punct"].get<std::string>());
    if (j.contains("encoder")) {
      json enc = nn::to_json(c.encoder);
      for (const auto& [key, value] : j["encoder"].items()) {
        if (!enc.contains(key)) throw ConfigError("unknown encoder config key '" + key + "'");
        enc[key] = value;
      }
      c.encoder = nn::encoder_config_from_json(enc);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

const std::vector<std::pair<Variant, std::string>>& variant_table() {
  static const std::vector<std::pair<Variant, std::string>> t = {
      {Variant::kBase, "base"},           {Variant::kOracleMi, "oracle_mi"},
      {Variant::kPredictedMi, "predicted_mi"}, {Variant::kMtl, "mtl"},
      {Variant::kTranSeqFe, "transeq_fe"}, {Variant::kTranSeqFea, "transeq_fea"},
      {Variant::kTranSeqUf, "transeq_uf"}, {Variant::kTranSeqDl, "transeq_dl"},
      {Variant::kTranSeqFt, "transeq_ft"}, {Variant::kLcm, "lcm"},
      {Variant::kDcst, "dcst"},           {Variant::kDcstLcm, "dcst_lcm"},
      {Variant::kBaseStar, "base_star"}};
  return t;
}

}  // namespace

std::string variant_name(Variant v) {
  for (const auto& [var, name] : variant_table()) {
    if (var == v) return name;
  }
  throw ContractError("unnamed variant");
}

Variant variant_from_name(const std::string& name) {
  for (const auto& [var, n] : variant_table()) {
    if (n == name) return var;
  }
  std::string all;
  for (const auto& n : variant_names()) all += (all.empty() ? "" : ", ") + n;
  throw ConfigError("unknown variant '" + name + "' (expected one of " + all + ")");
}

std::vector<std::string> variant_names() {
  std::vector<std::string> out;
  for (const auto& [var, name] : variant_table()) out.push_back(name);
  return out;
}

std::string family_name(Family f) { return f == Family::kBiaff ? "biaff" : "dcst"; }

Family family_from_name(const std::string& name) {
  if (name == "biaff") return Family::kBiaff;
  if (name == "dcst") return Family::kDcst;
  throw ConfigError("unknown parser family '" + name + "' (expected biaff or dcst)");
}

std::vector<TagScheme> PipelineSpec::effective_schemes() const {
  if (!schemes.empty()) return schemes;
  switch (variant) {
    case Variant::kLcm:
    case Variant::kDcstLcm:
      return {TagScheme::MT, TagScheme::CT, TagScheme::LT};
    case Variant::kDcst:
      return {TagScheme::RD, TagScheme::NC, TagScheme::RP, TagScheme::LM};
    default:
      return {};
  }
}

json to_json(const PipelineSpec& s) {
  std::vector<std::string> schemes;
  for (TagScheme t : s.schemes) schemes.emplace_back(scheme_name(t));
  return {{"variant", variant_name(s.variant)}, {"family", family_name(s.family)},
          {"train", s.train},                   {"dev", s.dev},
          {"test", s.test},                     {"extra", s.extra},
          {"schemes", schemes},                 {"hier_checkpoint", s.hier_checkpoint},
          {"tags_file", s.tags_file},           {"word_vectors", s.word_vectors},
          {"run_name", s.run_name}};
}

PipelineSpec pipeline_spec_from_json(const json& j, PipelineSpec s) {
  if (!j.is_object()) throw ConfigError("pipeline spec must be a JSON object");
  static const std::set<std::string> known = {"variant", "family", "train", "dev", "test", "extra", "schemes",
                                              "hier_checkpoint", "tags_file", "word_vectors", "run_name"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown pipeline spec key '" + key + "'");
  }
  try {
    if (j.contains("variant")) s.variant = variant_from_name(j["variant"].get<std::string>());
    if (j.contains("family")) s.family = family_from_name(j["family"].get<std::string>());
    for (auto [key, field] : {std::pair{"train", &s.train}, {"dev", &s.dev}, {"test", &s.test}, {"extra", &s.extra},
                              {"hier_checkpoint", &s.hier_checkpoint}, {"tags_file", &s.tags_file},
                              {"word_vectors", &s.word_vectors}, {"run_name", &s.run_name}}) {
      if (j.contains(key)) *field = j[key].get<std::string>();
    }
    if (j.contains("schemes")) {
      s.schemes.clear();
      for (const auto& name : j["schemes"]) {
        const auto scheme = scheme_from_name(name.get<std::string>());
        if (!scheme) throw ConfigError("unknown scheme '" + name.get<std::string>() + "'");
        s.schemes.push_back(*scheme);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline spec: ") + e.what());
  }
  return s;
}

}  // namespace lcm::pipelines
