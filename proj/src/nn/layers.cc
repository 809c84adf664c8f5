#include "lcm/nn/layers.h"

#include <limits>

#include "lcm/error.h"

namespace lcm::nn {

using namespace lcm::ad;

Tensor affine(const Tensor& h, const Tensor& weight, const Tensor& bias) { return add(matmul(h, weight), bias); }

Tensor biaffine(const Tensor& h_dep, const Tensor& h_head, const Tensor& u, const Tensor& u_head, const Tensor& bias) {
  Tensor dep = reshape(h_dep, {1, h_dep.size()});
  Tensor head = reshape(h_head, {1, h_head.size()});
  Tensor head_col = transpose(head);
  Tensor bilinear = matmul(matmul(dep, u), head_col);
  Tensor prior = matmul(reshape(u_head, {1, u_head.size()}), head_col);
  return reshape(add(add(bilinear, prior), bias), {});
}

Linear::Linear(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out, bool zero_weight)
    : weight(store.add(prefix + ".W", {in, out}, zero_weight ? zeros_init() : xavier_init(in, out))),
      bias(store.add(prefix + ".b", {1, out}, zeros_init())) {}

ArcBiaffine::ArcBiaffine(ParameterStore& store, const std::string& prefix, std::size_t dim)
    : u(store.add(prefix + ".U", {dim, dim}, zeros_init())),
      u_head(store.add(prefix + ".u_head", {dim, 1}, zeros_init())),
      bias(store.add(prefix + ".bias", {1, 1}, zeros_init())) {}

Tensor ArcBiaffine::operator()(const Tensor& dep, const Tensor& head) const {
  Tensor s = matmul(matmul(dep, u), transpose(head));
  Tensor prior = transpose(matmul(head, u_head));
  return add(add(s, prior), bias);
}

LabelBiaffine::LabelBiaffine(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t relations)
    : u(store.add(prefix + ".U", {relations, dim, dim}, zeros_init())),
      w_dep(store.add(prefix + ".W_dep", {dim, relations}, xavier_init(dim, relations))),
      w_head(store.add(prefix + ".W_head", {dim, relations}, xavier_init(dim, relations))),
      bias(store.add(prefix + ".b", {1, relations}, zeros_init())) {}

Tensor LabelBiaffine::operator()(const Tensor& dep, const Tensor& head) const {
  Tensor bil = row_bilinear(dep, u, head);
  return add(add(add(bil, matmul(dep, w_dep)), matmul(head, w_head)), bias);
}

Adapter::Adapter(ParameterStore& store, const std::string& prefix, std::size_t width, std::size_t bottleneck)
    : down(store, prefix + ".down", width, bottleneck), up(store, prefix + ".up", bottleneck, width, true) {}

Tensor Adapter::operator()(const Tensor& h) const { return add(h, up(relu(down(h)))); }

Tensor adapter_forward(const Tensor& h, const Adapter& adapter) {
  if (h.cols() != adapter.down.in()) {
    throw ShapeError("adapter: input width " + std::to_string(h.cols()) + " but adapter expects " +
                     std::to_string(adapter.down.in()));
  }
  return adapter(h);
}

GateCombiner::GateCombiner(ParameterStore& store, const std::string& prefix, std::size_t k, std::size_t width,
                           GateVariant variant)
    : k_(k), variant_(variant), disabled_(k, false) {
  if (k == 0) throw ConfigError("gate needs at least one encoder");
  if (variant == GateVariant::kElementwiseSigmoid) {
    if (k != 2) throw ConfigError("elementwise-sigmoid gate combines exactly two encoders, got " + std::to_string(k));
    g1 = store.add(prefix + ".G1", {width, width}, xavier_init(width, width));
    g2 = store.add(prefix + ".G2", {width, width}, xavier_init(width, width));
    gb = store.add(prefix + ".c", {1, width}, zeros_init());
    return;
  }
  for (std::size_t i = 0; i < k; ++i) {
    w.push_back(store.add(prefix + ".w" + std::to_string(i), {width, 1}, xavier_init(width, 1)));
    b.push_back(store.add(prefix + ".b" + std::to_string(i), {1, 1}, zeros_init()));
  }
}

void GateCombiner::set_disabled(std::size_t index, bool disabled) { disabled_.at(index) = disabled; }

Tensor GateCombiner::scores(const std::vector<Tensor>& reps) const {
  std::vector<Tensor> cols;
  bool any_disabled = false;
  for (std::size_t i = 0; i < k_; ++i) {
    cols.push_back(add(matmul(reps[i], w[i]), b[i]));
    any_disabled |= disabled_[i];
  }
  Tensor s = concat(cols, 1);
  if (any_disabled) {
    Tensor mask = Tensor::zeros({1, k_});
    for (std::size_t i = 0; i < k_; ++i) {
      if (disabled_[i]) mask.mutable_data()[i] = -std::numeric_limits<double>::infinity();
    }
    s = add(s, mask);
  }
  return s;
}

Tensor GateCombiner::alphas(const std::vector<Tensor>& reps) const {
  if (variant_ != GateVariant::kScalarSoftmax) throw ContractError("alphas: only defined for scalar-softmax gates");
  return softmax(scores(reps), 1);
}

Tensor GateCombiner::operator()(const std::vector<Tensor>& reps) const {
  if (reps.size() != k_) {
    throw ShapeError("gate: expected " + std::to_string(k_) + " encoder outputs, got " + std::to_string(reps.size()));
  }
  for (const Tensor& r : reps) {
    if (r.shape() != reps[0].shape()) {
      throw ShapeError("gate: encoder outputs differ in shape: " + shape_string(reps[0].shape()) + " vs " +
                       shape_string(r.shape()));
    }
  }
  if (variant_ == GateVariant::kElementwiseSigmoid) {
    Tensor g = sigmoid(add(add(matmul(reps[0], g1), matmul(reps[1], g2)), gb));
    return add(mul(g, reps[0]), sub(reps[1], mul(g, reps[1])));
  }
  Tensor a = alphas(reps);
  Tensor out;
  for (std::size_t i = 0; i < k_; ++i) {
    Tensor term = mul(slice(a, 1, i, i + 1), reps[i]);
    out = out.defined() ? add(out, term) : term;
  }
  return out;
}

Tensor gate_combine(const std::vector<Tensor>& reps, const GateCombiner& combiner) { return combiner(reps); }

std::string gate_variant_name(GateVariant v) {
  return v == GateVariant::kScalarSoftmax ? "scalar-softmax" : "elementwise-sigmoid";
}

GateVariant gate_variant_from_name(const std::string& name) {
  if (name == "scalar-softmax") return GateVariant::kScalarSoftmax;
  if (name == "elementwise-sigmoid") return GateVariant::kElementwiseSigmoid;
  throw ConfigError("unknown gate variant '" + name + "'");
}

MlpHead::MlpHead(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t h1, std::size_t h2,
                 std::size_t n_out)
    : fc1(store, prefix + ".fc1", in, h1), fc2(store, prefix + ".fc2", h1, h2), out(store, prefix + ".out", h2, n_out) {}

Tensor MlpHead::operator()(const Tensor& x, double dropout_p, bool train, Rng& rng) const {
  Tensor h = ad::dropout(x, dropout_p, train, rng);
  return out(ad::relu(fc2(ad::relu(fc1(h)))));
}

}  // namespace lcm::nn
