#include "lcm/autodiff/parameter_store.h"

#include <cmath>

#include "lcm/error.h"

namespace lcm::ad {

Initializer zeros_init() {
  return [](std::span<double> v, Rng&) { std::fill(v.begin(), v.end(), 0.0); };
}

Initializer constant_init(double value) {
  return [value](std::span<double> v, Rng&) { std::fill(v.begin(), v.end(), value); };
}

Initializer uniform_init(double bound) {
  return [bound](std::span<double> v, Rng& rng) {
    for (double& x : v) x = rng.uniform(-bound, bound);
  };
}

Initializer xavier_init(std::size_t fan_in, std::size_t fan_out) {
  return uniform_init(std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)));
}

Tensor ParameterStore::add(const std::string& name, Shape shape, const Initializer& init) {
  if (params_.count(name)) throw ContractError("parameter '" + name + "' registered twice");
  Tensor t = Tensor::zeros(std::move(shape), true);
  Rng rng = Rng(seed_).split("init").split(name);
  init(t.mutable_data(), rng);
  Parameter p;
  p.value = t;
  params_.emplace(name, std::move(p));
  return t;
}

Tensor ParameterStore::get(const std::string& name) const { return at(name).value; }

Parameter& ParameterStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter '" + name + "'");
  return it->second;
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParameterStore::count(const std::string& prefix) const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) {
    if (name.starts_with(prefix)) n += p.value.size();
  }
  return n;
}

std::vector<std::string> ParameterStore::names(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, p] : params_) {
    if (name.starts_with(prefix)) out.push_back(name);
  }
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& [name, p] : params_) p.value.zero_grad();
}

void ParameterStore::set_trainable(const std::string& prefix, bool trainable) {
  for (auto& [name, p] : params_) {
    if (!name.starts_with(prefix)) continue;
    p.trainable = trainable;
    p.value.set_requires_grad(trainable);
  }
}

void ParameterStore::set_lr_scale(const std::string& prefix, double scale) {
  for (auto& [name, p] : params_) {
    if (name.starts_with(prefix)) p.lr_scale = scale;
  }
}

Snapshot ParameterStore::snapshot() const {
  Snapshot s;
  for (const auto& [name, p] : params_) s.emplace(name, std::vector<double>(p.value.data().begin(), p.value.data().end()));
  return s;
}

void ParameterStore::restore(const Snapshot& snapshot) {
  for (const auto& [name, values] : snapshot) {
    Parameter& p = at(name);
    if (p.value.size() != values.size()) throw ContractError("restore: size mismatch for '" + name + "'");
    std::copy(values.begin(), values.end(), p.value.mutable_data().begin());
  }
}

void ParameterStore::copy_from(const ParameterStore& src, const std::string& src_prefix, const std::string& dst_prefix) {
  std::size_t copied = 0;
  for (const auto& [name, p] : src.params_) {
    if (!name.starts_with(src_prefix)) continue;
    const std::string dst = dst_prefix + name.substr(src_prefix.size());
    auto it = params_.find(dst);
    if (it == params_.end()) throw ConfigError("copy_from: no destination parameter '" + dst + "'");
    if (it->second.value.shape() != p.value.shape()) {
      throw ConfigError("copy_from: shape mismatch for '" + dst + "': " + shape_string(it->second.value.shape()) +
                        " vs " + shape_string(p.value.shape()));
    }
    std::copy(p.value.data().begin(), p.value.data().end(), it->second.value.mutable_data().begin());
    ++copied;
  }
  if (copied == 0) throw ConfigError("copy_from: no parameters under '" + src_prefix + "'");
}

}  // namespace lcm::ad
