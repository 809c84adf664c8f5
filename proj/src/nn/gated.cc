#include "lcm/nn/gated.h"

namespace lcm::nn {

GatedEncoder::GatedEncoder(ParameterStore& store, const EncoderConfig& config, EncoderVocabs vocabs,
                           const std::vector<AuxEncoderSpec>& aux_specs, GateVariant variant)
    : main(store, "enc.", config, std::move(vocabs)) {
  for (const AuxEncoderSpec& spec : aux_specs) {
    aux.emplace_back(store, aux_prefix(spec.name), spec.config, spec.vocabs);
    aux_names.push_back(spec.name);
    if (spec.config.output_dim() != main.output_dim()) {
      projections.emplace_back(Linear(store, "proj." + spec.name, spec.config.output_dim(), main.output_dim()));
    } else {
      projections.emplace_back(std::nullopt);
    }
  }
  if (!aux.empty()) gate.emplace(store, "gate", aux.size() + 1, main.output_dim(), variant);
}

Tensor GatedEncoder::encode(const Sentence& sentence, Mode mode, const Rng& rng,
                            const std::vector<std::string>* tags) const {
  Tensor top = main.encode(sentence, mode, rng, tags).top;
  if (!gate) return top;
  std::vector<Tensor> reps = {top};
  for (std::size_t i = 0; i < aux.size(); ++i) {
    Tensor h = aux[i].encode(sentence, mode, rng).top;
    if (projections[i]) h = (*projections[i])(h);
    reps.push_back(h);
  }
  return (*gate)(reps);
}

std::vector<std::string> GatedEncoder::roster() const {
  std::vector<std::string> r = {"P"};
  r.insert(r.end(), aux_names.begin(), aux_names.end());
  return r;
}

}  // namespace lcm::nn
