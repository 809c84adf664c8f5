#pragma once

#include <string>
#include <vector>

#include "lcm/autodiff/grad_check.h"
#include "lcm/pipelines/config.h"

namespace lcm::pipelines {

// Components checkable against finite differences: char-cnn, bilstm,
// biaffine, label-biaffine, gate, adapter, encoder, biaff (full parser loss),
// mtl (parser with tagging head), tagger, hier (hierarchical tagger).
std::vector<std::string> grad_check_components();

// Builds the component at the profile's sizes on a few synthetic sentences,
// moves every parameter off its initial value so that zero-initialised paths
// carry gradient, and compares backprop with central differences in
// evaluation mode.
ad::GradCheckResult grad_check_component(const std::string& component, const TrainConfig& config,
                                         std::size_t samples = 20, double eps = 1e-5, std::uint64_t seed = 0);

}  // namespace lcm::pipelines
