#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "lcm/autodiff/parameter_store.h"

namespace lcm::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "name[index]" of the worst coordinate
};

// Compares backprop gradients against central differences
//   (f(x+eps) - f(x-eps)) / 2eps
// on `samples` coordinates of the trainable parameters (0 = all of them).
// Three quarters of the sample is drawn from coordinates with a non-zero
// analytic gradient, the rest uniformly. Error per coordinate is
//   |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
// loss_fn must be deterministic; a non-finite loss raises NumericError.
GradCheckResult grad_check(ParameterStore& params, const std::function<Tensor()>& loss_fn, double eps = 1e-5,
                           std::size_t samples = 20, std::uint64_t seed = 0);

}  // namespace lcm::ad
