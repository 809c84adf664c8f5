#pragma once

#include <string>
#include <vector>

#include "lcm/autodiff/ops.h"
#include "lcm/autodiff/parameter_store.h"

namespace lcm::nn {

using ad::ParameterStore;
using ad::Tensor;
using lcm::Rng;

enum class Mode { kTrain, kEval };

inline bool training(Mode m) { return m == Mode::kTrain; }

// W h + b, with h given as rows.
Tensor affine(const Tensor& h, const Tensor& weight, const Tensor& bias);

// h_dep^T U h_head + u_head^T h_head + bias for single vectors. The second
// term is the head prior: how likely a word is to be a head at all.
Tensor biaffine(const Tensor& h_dep, const Tensor& h_head, const Tensor& u, const Tensor& u_head,
                const Tensor& bias);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
         bool zero_weight = false);
  Tensor operator()(const Tensor& x) const { return affine(x, weight, bias); }
  std::size_t in() const { return weight.rows(); }
  std::size_t out() const { return weight.cols(); }

  Tensor weight;  // [in x out]
  Tensor bias;    // [1 x out]
};

// Scores every (head, dependent) pair at once:
//   S[i][j] = dep_i U head_j^T + head_j u + bias
// rows index dependents, columns heads.
class ArcBiaffine {
 public:
  ArcBiaffine() = default;
  ArcBiaffine(ParameterStore& store, const std::string& prefix, std::size_t dim);
  Tensor operator()(const Tensor& dep, const Tensor& head) const;

  Tensor u;       // [d x d]
  Tensor u_head;  // [d x 1]
  Tensor bias;    // [1 x 1]
};

// Per-relation biaffine over (dependent, chosen head) pairs:
//   logits[i][r] = dep_i U_r head_i^T + dep_i W_dep[:,r] + head_i W_head[:,r] + b_r
class LabelBiaffine {
 public:
  LabelBiaffine() = default;
  LabelBiaffine(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t relations);
  Tensor operator()(const Tensor& dep, const Tensor& head) const;

  Tensor u;       // [R x d x d]
  Tensor w_dep;   // [d x R]
  Tensor w_head;  // [d x R]
  Tensor bias;    // [1 x R]
};

// Bottleneck adapter with a residual path: h + Up(relu(Down(h))). The
// up-projection starts at zero so a fresh adapter is the identity.
class Adapter {
 public:
  Adapter() = default;
  Adapter(ParameterStore& store, const std::string& prefix, std::size_t width, std::size_t bottleneck);
  Tensor operator()(const Tensor& h) const;

  Linear down;
  Linear up;
};

Tensor adapter_forward(const Tensor& h, const Adapter& adapter);

enum class GateVariant { kScalarSoftmax, kElementwiseSigmoid };

// Combines K same-shaped encoder outputs token by token.
//   scalar-softmax: alpha_k(t) = softmax_k(rep_k(t) w_k + b_k),
//                   out(t) = sum_k alpha_k(t) rep_k(t)
//   elementwise-sigmoid (K = 2): g = sigmoid(rep_1 G_1 + rep_2 G_2 + c),
//                   out = g * rep_1 + (1 - g) * rep_2
class GateCombiner {
 public:
  GateCombiner() = default;
  GateCombiner(ParameterStore& store, const std::string& prefix, std::size_t k, std::size_t width,
               GateVariant variant = GateVariant::kScalarSoftmax);

  Tensor operator()(const std::vector<Tensor>& reps) const;
  // Per-token weights [rows x K] (scalar-softmax only).
  Tensor alphas(const std::vector<Tensor>& reps) const;

  std::size_t k() const { return k_; }
  GateVariant variant() const { return variant_; }
  // Diagnostic: a disabled encoder's score is forced to -inf, so its weight
  // is exactly zero.
  void set_disabled(std::size_t index, bool disabled);

  std::vector<Tensor> w;  // [width x 1] each
  std::vector<Tensor> b;  // [1 x 1] each
  Tensor g1, g2, gb;      // elementwise variant

 private:
  Tensor scores(const std::vector<Tensor>& reps) const;
  std::size_t k_ = 0;
  GateVariant variant_ = GateVariant::kScalarSoftmax;
  std::vector<bool> disabled_;
};

// fc1 -> relu -> fc2 -> relu -> output logits, with dropout on the input.
class MlpHead {
 public:
  MlpHead() = default;
  MlpHead(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t fc1, std::size_t fc2,
          std::size_t out);
  Tensor operator()(const Tensor& x, double dropout_p, bool training, Rng& rng) const;

  Linear fc1;
  Linear fc2;
  Linear out;
};

Tensor gate_combine(const std::vector<Tensor>& reps, const GateCombiner& combiner);

std::string gate_variant_name(GateVariant v);
GateVariant gate_variant_from_name(const std::string& name);

}  // namespace lcm::nn
