#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcm/nn/encoder.h"

namespace lcm::nn {

struct AuxEncoderSpec {
  std::string name;  // roster label, e.g. a scheme name
  EncoderConfig config;
  EncoderVocabs vocabs;
};

// The parser's own encoder plus any pretrained auxiliary encoders, combined
// token by token by a gate. With no auxiliary encoders there is no gate and
// the output is the main encoder's.
//
// Parameter names: "enc." for the main encoder, "aux.<name>." for auxiliary
// encoders, "proj.<name>" for width projections, "gate" for the combiner.
class GatedEncoder {
 public:
  GatedEncoder() = default;
  GatedEncoder(ParameterStore& store, const EncoderConfig& config, EncoderVocabs vocabs,
               const std::vector<AuxEncoderSpec>& aux, GateVariant variant = GateVariant::kScalarSoftmax);

  Tensor encode(const Sentence& sentence, Mode mode, const Rng& rng,
                const std::vector<std::string>* tags = nullptr) const;

  // "P" followed by the auxiliary names, in gate order.
  std::vector<std::string> roster() const;
  std::size_t output_dim() const { return main.output_dim(); }
  static std::string aux_prefix(const std::string& name) { return "aux." + name + "."; }

  Encoder main;
  std::vector<Encoder> aux;
  std::vector<std::string> aux_names;
  std::vector<std::optional<Linear>> projections;
  std::optional<GateCombiner> gate;
};

}  // namespace lcm::nn
