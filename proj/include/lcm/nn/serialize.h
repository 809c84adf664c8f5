#pragma once

#include <json.hpp>

#include "lcm/nn/gated.h"

namespace lcm::nn {

nlohmann::json to_json(const EncoderConfig& c);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Vocab& v);
Vocab vocab_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EncoderVocabs& v);
EncoderVocabs encoder_vocabs_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AuxEncoderSpec& s);
AuxEncoderSpec aux_spec_from_json(const nlohmann::json& j);

}  // namespace lcm::nn
