#include "lcm/nn/serialize.h"

#include "lcm/error.h"

namespace lcm::nn {

using nlohmann::json;

json to_json(const EncoderConfig& c) {
  return {{"word_dim", c.word_dim},       {"char_dim", c.char_dim},       {"char_filters", c.char_filters},
          {"char_kernel", c.char_kernel}, {"lstm_hidden", c.lstm_hidden}, {"lstm_layers", c.lstm_layers},
          {"dropout", c.dropout},         {"tag_dim", c.tag_dim}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig c;
  try {
    c.word_dim = j.value("word_dim", c.word_dim);
    c.char_dim = j.value("char_dim", c.char_dim);
    c.char_filters = j.value("char_filters", c.char_filters);
    c.char_kernel = j.value("char_kernel", c.char_kernel);
    c.lstm_hidden = j.value("lstm_hidden", c.lstm_hidden);
    c.lstm_layers = j.value("lstm_layers", c.lstm_layers);
    c.dropout = j.value("dropout", c.dropout);
    c.tag_dim = j.value("tag_dim", c.tag_dim);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("encoder config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const Vocab& v) { return v.symbols(); }

Vocab vocab_from_json(const json& j) { return Vocab::from_symbols(j.get<std::vector<std::string>>()); }

json to_json(const EncoderVocabs& v) {
  return {{"words", to_json(v.words)}, {"chars", to_json(v.chars)}, {"tags", to_json(v.tags)}};
}

EncoderVocabs encoder_vocabs_from_json(const json& j) {
  return {vocab_from_json(j.at("words")), vocab_from_json(j.at("chars")), vocab_from_json(j.at("tags"))};
}

json to_json(const AuxEncoderSpec& s) {
  return {{"name", s.name}, {"config", to_json(s.config)}, {"vocabs", to_json(s.vocabs)}};
}

AuxEncoderSpec aux_spec_from_json(const json& j) {
  return {j.at("name").get<std::string>(), encoder_config_from_json(j.at("config")),
          encoder_vocabs_from_json(j.at("vocabs"))};
}

}  // namespace lcm::nn
