#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lcm/autodiff/tensor.h"
#include "lcm/rng.h"

namespace lcm::ad {

using Initializer = std::function<void(std::span<double>, Rng&)>;

Initializer zeros_init();
Initializer constant_init(double value);
Initializer uniform_init(double bound);
Initializer xavier_init(std::size_t fan_in, std::size_t fan_out);

struct Parameter {
  Tensor value;
  // Adam state.
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  double lr_scale = 1.0;
  bool trainable = true;
};

using Snapshot = std::map<std::string, std::vector<double>>;

// Named trainable tensors. Initial values depend only on (seed, name), so
// the order in which components register their parameters is irrelevant.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed) {}
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Tensor add(const std::string& name, Shape shape, const Initializer& init);
  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  Tensor get(const std::string& name) const;
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;

  const std::map<std::string, Parameter>& parameters() const { return params_; }
  std::map<std::string, Parameter>& parameters() { return params_; }

  // Total element count of parameters whose name starts with `prefix`.
  std::size_t count(const std::string& prefix = "") const;
  std::vector<std::string> names(const std::string& prefix = "") const;

  void zero_grad();
  // Freezing also stops gradient tracking through the tensor.
  void set_trainable(const std::string& prefix, bool trainable);
  void set_lr_scale(const std::string& prefix, double scale);

  Snapshot snapshot() const;
  void restore(const Snapshot& snapshot);
  // Copies values of src's `src_prefix*` parameters onto this store's
  // `dst_prefix*` parameters; every source name must have a same-shaped
  // destination.
  void copy_from(const ParameterStore& src, const std::string& src_prefix, const std::string& dst_prefix);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::map<std::string, Parameter> params_;
};

}  // namespace lcm::ad
