#pragma once

#include <span>
#include <vector>

#include "lcm/autodiff/tensor.h"
#include "lcm/rng.h"

// Differentiable primitives. Every op records itself when any input is
// tracked. Shape mismatches raise ShapeError naming the op and the shapes.
// 2-D ops treat rank-0/rank-1 tensors as a single row.
namespace lcm::ad {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Elementwise with broadcasting of the second operand (or the first, for the
// commutative ops) from [1 x c], [r x 1] or a single element.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

// axis 0 stacks rows, axis 1 joins columns.
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& a, int axis, std::size_t begin, std::size_t end);
inline Tensor row(const Tensor& a, std::size_t r) { return slice(a, 0, r, r + 1); }
Tensor reshape(const Tensor& a, Shape shape);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);

Tensor softmax(const Tensor& a, int axis = 1);
Tensor log_softmax(const Tensor& a, int axis = 1);

// Inverted dropout: kept units are scaled by 1/(1-p) in training mode; the
// identity otherwise.
Tensor dropout(const Tensor& a, double p, bool training, Rng& rng);

// Rows of `table` selected by index: [n x d].
Tensor embedding_lookup(const Tensor& table, std::span<const int> indices);

// Maximum over rows (axis 0, -> [1 x c]) or columns (axis 1, -> [r x 1]).
// Ties pass the gradient to the first maximal element.
Tensor max_over_axis(const Tensor& a, int axis);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// -log softmax(logits)[target] for a single row of logits.
Tensor cross_entropy(const Tensor& logits, int target);
// Mean over rows of cross_entropy(logits[r], targets[r]).
Tensor cross_entropy_rows(const Tensor& logits, std::span<const int> targets);

// out[i][r] = a[i] . U[r] . b[i]^T for U of shape [R x d1 x d2].
Tensor row_bilinear(const Tensor& a, const Tensor& u, const Tensor& b);

// Sliding windows over rows: [L x d] -> [(L-k+1) x k*d].
Tensor unfold_rows(const Tensor& a, std::size_t k);

}  // namespace lcm::ad
