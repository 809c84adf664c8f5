#include "lcm/autodiff/grad_check.h"

#include <cmath>

#include "lcm/error.h"
#include "lcm/rng.h"

namespace lcm::ad {

namespace {

double eval(const std::function<Tensor()>& loss_fn) {
  const double v = loss_fn().item();
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss");
  return v;
}

struct Coord {
  Parameter* param;
  const std::string* name;
  std::size_t index;
};

}  // namespace

GradCheckResult grad_check(ParameterStore& params, const std::function<Tensor()>& loss_fn, double eps,
                           std::size_t samples, std::uint64_t seed) {
  params.zero_grad();
  Tensor loss = loss_fn();
  if (!std::isfinite(loss.item())) throw NumericError("grad_check: non-finite loss");
  backward(loss);

  std::vector<Coord> all, nonzero;
  for (auto& [name, p] : params.parameters()) {
    if (!p.trainable) continue;
    auto g = p.value.grad();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      all.push_back({&p, &name, i});
      if (!g.empty() && g[i] != 0.0) nonzero.push_back({&p, &name, i});
    }
  }

  std::vector<Coord> chosen;
  if (samples == 0 || samples >= all.size()) {
    chosen = all;
  } else {
    Rng rng = Rng(seed).split("grad_check");
    const std::size_t from_nonzero = nonzero.empty() ? 0 : (samples * 3 + 3) / 4;
    for (std::size_t k = 0; k < from_nonzero; ++k) chosen.push_back(nonzero[rng.below(nonzero.size())]);
    while (chosen.size() < samples) chosen.push_back(all[rng.below(all.size())]);
  }

  GradCheckResult result;
  for (const Coord& c : chosen) {
    auto g = c.param->value.grad();
    const double analytic = g.empty() ? 0.0 : g[c.index];
    double& x = c.param->value.mutable_data()[c.index];
    const double saved = x;
    x = saved + eps;
    const double fp = eval(loss_fn);
    x = saved - eps;
    const double fm = eval(loss_fn);
    x = saved;
    const double numeric = (fp - fm) / (2.0 * eps);
    const double err = std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    ++result.checked;
    if (err > result.max_rel_error || result.worst.empty()) {
      if (err >= result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = *c.name + "[" + std::to_string(c.index) + "]";
      }
    }
  }
  params.zero_grad();
  return result;
}

}  // namespace lcm::ad
