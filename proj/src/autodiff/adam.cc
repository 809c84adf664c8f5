#include "lcm/autodiff/adam.h"

#include <cmath>

namespace lcm::ad {

void adam_step(ParameterStore& store, const AdamConfig& config) {
  for (auto& [name, p] : store.parameters()) {
    auto grad = p.value.grad();
    if (!p.trainable || grad.empty()) {
      p.value.zero_grad();
      continue;
    }
    const std::size_t n = p.value.size();
    if (p.m.size() != n) {
      p.m.assign(n, 0.0);
      p.v.assign(n, 0.0);
    }
    ++p.step;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(p.step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(p.step));
    const double lr = config.lr * p.lr_scale;
    auto w = p.value.mutable_data();
    for (std::size_t k = 0; k < n; ++k) {
      const double g = grad[k];
      p.m[k] = config.beta1 * p.m[k] + (1.0 - config.beta1) * g;
      p.v[k] = config.beta2 * p.v[k] + (1.0 - config.beta2) * g * g;
      const double mhat = p.m[k] / c1;
      const double vhat = p.v[k] / c2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + config.eps);
    }
    p.value.zero_grad();
  }
}

}  // namespace lcm::ad
