#pragma once

#include "lcm/autodiff/parameter_store.h"

namespace lcm::ad {

struct AdamConfig {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update of every trainable parameter (learning rate
// multiplied by the parameter's lr_scale), then zeroes all gradients.
// Parameters that never received a gradient are left untouched.
void adam_step(ParameterStore& store, const AdamConfig& config);

}  // namespace lcm::ad
