#include "lcm/autodiff/ops.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "lcm/error.h"

namespace lcm::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

using Backward = std::function<void(Node&)>;

Tensor make(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs, Backward bw) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  for (const Tensor& t : inputs) {
    if (t.requires_grad()) {
      node->requires_grad = true;
      break;
    }
  }
  if (node->requires_grad) {
    for (const Tensor& t : inputs) node->parents.push_back(t.node_ptr());
    node->backward = std::move(bw);
  }
  return Tensor(std::move(node));
}

Tensor make_n(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs, Backward bw) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  for (const Tensor& t : inputs) node->requires_grad |= t.requires_grad();
  if (node->requires_grad) {
    for (const Tensor& t : inputs) node->parents.push_back(t.node_ptr());
    node->backward = std::move(bw);
  }
  return Tensor(std::move(node));
}

// Gradient buffer of parent i, or nullptr when the parent is not tracked.
double* pgrad(Node& self, std::size_t i) {
  Node* p = self.parents[i].get();
  if (!p->requires_grad) return nullptr;
  p->ensure_grad();
  return p->grad.data();
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) + " and " +
                   shape_string(b.shape()));
}

enum class Bcast { kSame, kRow, kCol, kScalar, kNone };

Bcast broadcast_kind(const Tensor& big, const Tensor& small) {
  if (big.shape() == small.shape()) return Bcast::kSame;
  if (small.size() == 1) return Bcast::kScalar;
  if (small.rows() == 1 && small.cols() == big.cols() && small.size() == big.cols()) return Bcast::kRow;
  if (small.cols() == 1 && small.rows() == big.rows() && big.rank() == 2) return Bcast::kCol;
  return Bcast::kNone;
}

// Index into the broadcast operand for flat position k of the big operand.
inline std::size_t bidx(Bcast kind, std::size_t k, std::size_t cols) {
  switch (kind) {
    case Bcast::kSame: return k;
    case Bcast::kRow: return k % cols;
    case Bcast::kCol: return k / cols;
    default: return 0;
  }
}

template <typename Fwd, typename GradA, typename GradB>
Tensor binary(const char* op, const Tensor& a0, const Tensor& b0, bool commutative, Fwd fwd, GradA ga, GradB gb) {
  Tensor a = a0, b = b0;
  Bcast kind = broadcast_kind(a, b);
  if (kind == Bcast::kNone && commutative) {
    kind = broadcast_kind(b, a);
    if (kind != Bcast::kNone) {
      std::swap(a, b);
    }
  }
  if (kind == Bcast::kNone) shape_fail(op, a0, b0);
  const std::size_t n = a.size(), cols = a.cols();
  std::vector<double> out(n);
  const double* av = a.data().data();
  const double* bv = b.data().data();
  for (std::size_t k = 0; k < n; ++k) out[k] = fwd(av[k], bv[bidx(kind, k, cols)]);
  return make(a.shape(), std::move(out), {a, b}, [kind, cols, n, ga, gb](Node& self) {
    const double* g = self.grad.data();
    const double* av = self.parents[0]->value.data();
    const double* bv = self.parents[1]->value.data();
    if (double* gA = pgrad(self, 0)) {
      for (std::size_t k = 0; k < n; ++k) gA[k] += ga(g[k], av[k], bv[bidx(kind, k, cols)]);
    }
    if (double* gB = pgrad(self, 1)) {
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t j = bidx(kind, k, cols);
        gB[j] += gb(g[k], av[k], bv[j]);
      }
    }
  });
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  const std::size_t n = a.size();
  std::vector<double> out(n);
  const double* av = a.data().data();
  for (std::size_t k = 0; k < n; ++k) out[k] = fwd(av[k]);
  return make(a.shape(), std::move(out), {a}, [n, deriv](Node& self) {
    double* gA = pgrad(self, 0);
    if (!gA) return;
    const double* g = self.grad.data();
    const double* x = self.parents[0]->value.data();
    const double* y = self.value.data();
    for (std::size_t k = 0; k < n; ++k) gA[k] += g[k] * deriv(x[k], y[k]);
  });
}

// Iteration helper for per-axis reductions on a 2-D view.
struct AxisLayout {
  std::size_t groups, len, stride;
  std::size_t offset(std::size_t g) const { return stride == 1 ? g * len : g; }
};

AxisLayout axis_layout(const Tensor& a, int axis, const char* op) {
  const std::size_t r = a.rows(), c = a.cols();
  if (axis == 1 || axis == -1) return {r, c, 1};
  if (axis == 0) return {c, r, c};
  throw ShapeError(std::string(op) + ": axis must be 0 or 1");
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) shape_fail("matmul", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n);
  Map(out.data(), m, n).noalias() = MapC(a.data().data(), m, k) * MapC(b.data().data(), k, n);
  return make({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    MapC g(self.grad.data(), m, n);
    if (double* gA = pgrad(self, 0)) {
      Map(gA, m, k).noalias() += g * MapC(self.parents[1]->value.data(), k, n).transpose();
    }
    if (double* gB = pgrad(self, 1)) {
      Map(gB, k, n).noalias() += MapC(self.parents[0]->value.data(), m, k).transpose() * g;
    }
  });
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose: expected rank 2, got " + shape_string(a.shape()));
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  Map(out.data(), c, r) = MapC(a.data().data(), r, c).transpose();
  return make({c, r}, std::move(out), {a}, [r, c](Node& self) {
    if (double* gA = pgrad(self, 0)) Map(gA, r, c) += MapC(self.grad.data(), c, r).transpose();
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, true, [](double x, double y) { return x + y; }, [](double g, double, double) { return g; },
      [](double g, double, double) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, false, [](double x, double y) { return x - y; }, [](double g, double, double) { return g; },
      [](double g, double, double) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, true, [](double x, double y) { return x * y; }, [](double g, double, double y) { return g * y; },
      [](double g, double x, double) { return g * x; });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, [factor](double x) { return x * factor; }, [factor](double, double) { return factor; });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (parts.size() == 1) return parts[0];
  const bool matrix = parts[0].rank() == 2;
  for (const Tensor& p : parts) {
    if ((p.rank() == 2) != matrix) shape_fail("concat", parts[0], p);
  }
  if (axis == 0 && matrix) {
    const std::size_t c = parts[0].cols();
    std::size_t rows = 0;
    for (const Tensor& p : parts) {
      if (p.cols() != c) shape_fail("concat", parts[0], p);
      rows += p.rows();
    }
    std::vector<double> out;
    out.reserve(rows * c);
    for (const Tensor& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
    return make_n({rows, c}, std::move(out), parts, [](Node& self) {
      std::size_t off = 0;
      for (std::size_t i = 0; i < self.parents.size(); ++i) {
        const std::size_t sz = self.parents[i]->value.size();
        if (double* g = pgrad(self, i)) {
          for (std::size_t k = 0; k < sz; ++k) g[k] += self.grad[off + k];
        }
        off += sz;
      }
    });
  }
  if (axis != 0 && axis != 1 && axis != -1) throw ShapeError("concat: axis must be 0 or 1");
  // Join along columns (for rank < 2 this is plain vector concatenation).
  const std::size_t r = parts[0].rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  for (const Tensor& p : parts) {
    if (p.rows() != r) shape_fail("concat", parts[0], p);
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(r * total);
  std::size_t col = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double* src = parts[i].data().data();
    for (std::size_t rr = 0; rr < r; ++rr) {
      std::copy_n(src + rr * widths[i], widths[i], out.data() + rr * total + col);
    }
    col += widths[i];
  }
  Shape shape = matrix ? Shape{r, total} : Shape{total};
  return make_n(std::move(shape), std::move(out), parts, [r, total, widths](Node& self) {
    std::size_t col = 0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      if (double* g = pgrad(self, i)) {
        for (std::size_t rr = 0; rr < r; ++rr) {
          const double* src = self.grad.data() + rr * total + col;
          double* dst = g + rr * widths[i];
          for (std::size_t k = 0; k < widths[i]; ++k) dst[k] += src[k];
        }
      }
      col += widths[i];
    }
  });
}

Tensor slice(const Tensor& a, int axis, std::size_t begin, std::size_t end) {
  const std::size_t r = a.rows(), c = a.cols();
  const bool by_rows = axis == 0 && a.rank() == 2;
  const std::size_t extent = by_rows ? r : c;
  if (begin >= end || end > extent) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) + ") on axis " +
                     std::to_string(axis) + " of shape " + shape_string(a.shape()));
  }
  if (by_rows) {
    const double* src = a.data().data() + begin * c;
    std::vector<double> out(src, src + (end - begin) * c);
    return make({end - begin, c}, std::move(out), {a}, [begin, c](Node& self) {
      if (double* g = pgrad(self, 0)) {
        double* dst = g + begin * c;
        for (std::size_t k = 0; k < self.grad.size(); ++k) dst[k] += self.grad[k];
      }
    });
  }
  const std::size_t w = end - begin;
  std::vector<double> out(r * w);
  for (std::size_t rr = 0; rr < r; ++rr) std::copy_n(a.data().data() + rr * c + begin, w, out.data() + rr * w);
  Shape shape = a.rank() == 2 ? Shape{r, w} : Shape{w};
  return make(std::move(shape), std::move(out), {a}, [r, c, w, begin](Node& self) {
    if (double* g = pgrad(self, 0)) {
      for (std::size_t rr = 0; rr < r; ++rr) {
        for (std::size_t k = 0; k < w; ++k) g[rr * c + begin + k] += self.grad[rr * w + k];
      }
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw ShapeError("reshape: " + shape_string(a.shape()) + " to " + shape_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make(std::move(shape), std::move(out), {a}, [](Node& self) {
    if (double* g = pgrad(self, 0)) {
      for (std::size_t k = 0; k < self.grad.size(); ++k) g[k] += self.grad[k];
    }
  });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0 ? x : 0.0; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor softmax(const Tensor& a, int axis) {
  const AxisLayout L = axis_layout(a, axis, "softmax");
  std::vector<double> out(a.size());
  const double* x = a.data().data();
  for (std::size_t g = 0; g < L.groups; ++g) {
    const std::size_t o = L.offset(g);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < L.len; ++i) mx = std::max(mx, x[o + i * L.stride]);
    double z = 0;
    for (std::size_t i = 0; i < L.len; ++i) z += (out[o + i * L.stride] = std::exp(x[o + i * L.stride] - mx));
    for (std::size_t i = 0; i < L.len; ++i) out[o + i * L.stride] /= z;
  }
  return make(a.shape(), std::move(out), {a}, [L](Node& self) {
    double* gA = pgrad(self, 0);
    if (!gA) return;
    const double* y = self.value.data();
    const double* g = self.grad.data();
    for (std::size_t grp = 0; grp < L.groups; ++grp) {
      const std::size_t o = L.offset(grp);
      double dot = 0;
      for (std::size_t i = 0; i < L.len; ++i) dot += g[o + i * L.stride] * y[o + i * L.stride];
      for (std::size_t i = 0; i < L.len; ++i) {
        const std::size_t k = o + i * L.stride;
        gA[k] += y[k] * (g[k] - dot);
      }
    }
  });
}

Tensor log_softmax(const Tensor& a, int axis) {
  const AxisLayout L = axis_layout(a, axis, "log_softmax");
  std::vector<double> out(a.size());
  const double* x = a.data().data();
  for (std::size_t g = 0; g < L.groups; ++g) {
    const std::size_t o = L.offset(g);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < L.len; ++i) mx = std::max(mx, x[o + i * L.stride]);
    double z = 0;
    for (std::size_t i = 0; i < L.len; ++i) z += std::exp(x[o + i * L.stride] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t i = 0; i < L.len; ++i) out[o + i * L.stride] = x[o + i * L.stride] - lz;
  }
  return make(a.shape(), std::move(out), {a}, [L](Node& self) {
    double* gA = pgrad(self, 0);
    if (!gA) return;
    const double* y = self.value.data();
    const double* g = self.grad.data();
    for (std::size_t grp = 0; grp < L.groups; ++grp) {
      const std::size_t o = L.offset(grp);
      double gs = 0;
      for (std::size_t i = 0; i < L.len; ++i) gs += g[o + i * L.stride];
      for (std::size_t i = 0; i < L.len; ++i) {
        const std::size_t k = o + i * L.stride;
        gA[k] += g[k] - std::exp(y[k]) * gs;
      }
    }
  });
}

Tensor dropout(const Tensor& a, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ContractError("dropout: p must be in [0,1), got " + std::to_string(p));
  if (!training || p == 0.0) return a;
  const std::size_t n = a.size();
  std::vector<double> mask(n);
  const double keep = 1.0 / (1.0 - p);
  for (std::size_t k = 0; k < n; ++k) mask[k] = rng.uniform() >= p ? keep : 0.0;
  std::vector<double> out(n);
  const double* x = a.data().data();
  for (std::size_t k = 0; k < n; ++k) out[k] = x[k] * mask[k];
  return make(a.shape(), std::move(out), {a}, [mask = std::move(mask)](Node& self) {
    if (double* g = pgrad(self, 0)) {
      for (std::size_t k = 0; k < mask.size(); ++k) g[k] += self.grad[k] * mask[k];
    }
  });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> indices) {
  if (table.rank() != 2) throw ShapeError("embedding_lookup: table must be rank 2, got " + shape_string(table.shape()));
  const std::size_t v = table.rows(), d = table.cols(), n = indices.size();
  std::vector<int> idx(indices.begin(), indices.end());
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= v) {
      throw ContractError("embedding_lookup: index " + std::to_string(idx[i]) + " outside table of " +
                          std::to_string(v) + " rows");
    }
    std::copy_n(table.data().data() + idx[i] * d, d, out.data() + i * d);
  }
  return make({n, d}, std::move(out), {table}, [idx = std::move(idx), d](Node& self) {
    if (double* g = pgrad(self, 0)) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        double* dst = g + idx[i] * d;
        const double* src = self.grad.data() + i * d;
        for (std::size_t k = 0; k < d; ++k) dst[k] += src[k];
      }
    }
  });
}

Tensor max_over_axis(const Tensor& a, int axis) {
  const AxisLayout L = axis_layout(a, axis, "max_over_axis");
  std::vector<double> out(L.groups);
  std::vector<std::size_t> arg(L.groups);
  const double* x = a.data().data();
  for (std::size_t g = 0; g < L.groups; ++g) {
    const std::size_t o = L.offset(g);
    std::size_t best = o;
    for (std::size_t i = 1; i < L.len; ++i) {
      if (x[o + i * L.stride] > x[best]) best = o + i * L.stride;
    }
    arg[g] = best;
    out[g] = x[best];
  }
  Shape shape = (axis == 0) ? Shape{1, L.groups} : Shape{L.groups, 1};
  return make(std::move(shape), std::move(out), {a}, [arg = std::move(arg)](Node& self) {
    if (double* g = pgrad(self, 0)) {
      for (std::size_t i = 0; i < arg.size(); ++i) g[arg[i]] += self.grad[i];
    }
  });
}

Tensor sum(const Tensor& a) {
  double s = 0;
  for (double x : a.data()) s += x;
  return make({}, {s}, {a}, [](Node& self) {
    if (double* g = pgrad(self, 0)) {
      const std::size_t n = self.parents[0]->value.size();
      for (std::size_t k = 0; k < n; ++k) g[k] += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor cross_entropy_rows(const Tensor& logits, std::span<const int> targets) {
  const std::size_t r = logits.rows(), c = logits.cols();
  if (targets.size() != r) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                     shape_string(logits.shape()));
  }
  std::vector<int> tgt(targets.begin(), targets.end());
  std::vector<double> probs(r * c);
  const double* x = logits.data().data();
  double total = 0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = x + i * c;
    double mx = *std::max_element(row, row + c);
    double z = 0;
    for (std::size_t j = 0; j < c; ++j) z += (probs[i * c + j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] /= z;
    if (tgt[i] < 0) continue;
    if (static_cast<std::size_t>(tgt[i]) >= c) {
      throw ContractError("cross_entropy: target " + std::to_string(tgt[i]) + " outside " + std::to_string(c) +
                          " classes");
    }
    total += mx + std::log(z) - row[tgt[i]];
    ++counted;
  }
  const double denom = counted ? static_cast<double>(counted) : 1.0;
  return make({}, {total / denom}, {logits},
              [probs = std::move(probs), tgt = std::move(tgt), c, denom](Node& self) {
                double* g = pgrad(self, 0);
                if (!g) return;
                const double s = self.grad[0] / denom;
                for (std::size_t i = 0; i < tgt.size(); ++i) {
                  if (tgt[i] < 0) continue;
                  for (std::size_t j = 0; j < c; ++j) g[i * c + j] += s * probs[i * c + j];
                  g[i * c + tgt[i]] -= s;
                }
              });
}

Tensor cross_entropy(const Tensor& logits, int target) {
  const int t[1] = {target};
  if (logits.rows() != 1) throw ShapeError("cross_entropy: expected one row of logits, got " + shape_string(logits.shape()));
  return cross_entropy_rows(logits, t);
}

Tensor row_bilinear(const Tensor& a, const Tensor& u, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || u.rank() != 3 || a.rows() != b.rows() || u.shape()[1] != a.cols() ||
      u.shape()[2] != b.cols()) {
    throw ShapeError("row_bilinear: incompatible shapes " + shape_string(a.shape()) + ", " + shape_string(u.shape()) +
                     ", " + shape_string(b.shape()));
  }
  const std::size_t n = a.rows(), d1 = a.cols(), d2 = b.cols(), R = u.shape()[0];
  std::vector<double> out(n * R);
  MapC A(a.data().data(), n, d1), B(b.data().data(), n, d2);
  for (std::size_t r = 0; r < R; ++r) {
    MapC U(u.data().data() + r * d1 * d2, d1, d2);
    RowMat T = A * U;
    for (std::size_t i = 0; i < n; ++i) out[i * R + r] = T.row(static_cast<Eigen::Index>(i)).dot(B.row(static_cast<Eigen::Index>(i)));
  }
  return make({n, R}, std::move(out), {a, u, b}, [n, d1, d2, R](Node& self) {
    MapC A(self.parents[0]->value.data(), n, d1);
    MapC B(self.parents[2]->value.data(), n, d2);
    MapC G(self.grad.data(), n, R);
    double* gA = pgrad(self, 0);
    double* gU = pgrad(self, 1);
    double* gB = pgrad(self, 2);
    for (std::size_t r = 0; r < R; ++r) {
      MapC U(self.parents[1]->value.data() + r * d1 * d2, d1, d2);
      auto gr = G.col(static_cast<Eigen::Index>(r));
      if (gA) Map(gA, n, d1).noalias() += gr.asDiagonal() * (B * U.transpose());
      if (gB) Map(gB, n, d2).noalias() += gr.asDiagonal() * (A * U);
      if (gU) Map(gU + r * d1 * d2, d1, d2).noalias() += A.transpose() * (gr.asDiagonal() * B);
    }
  });
}

Tensor unfold_rows(const Tensor& a, std::size_t k) {
  if (a.rank() != 2 || k == 0 || a.rows() < k) {
    throw ShapeError("unfold_rows: window " + std::to_string(k) + " on shape " + shape_string(a.shape()));
  }
  const std::size_t L = a.rows(), d = a.cols(), m = L - k + 1, w = k * d;
  std::vector<double> out(m * w);
  // Rows are contiguous, so window j is the flat range [j*d, (j+k)*d).
  for (std::size_t j = 0; j < m; ++j) std::copy_n(a.data().data() + j * d, w, out.data() + j * w);
  return make({m, w}, std::move(out), {a}, [m, w, d](Node& self) {
    if (double* g = pgrad(self, 0)) {
      for (std::size_t j = 0; j < m; ++j) {
        const double* src = self.grad.data() + j * w;
        double* dst = g + j * d;
        for (std::size_t k = 0; k < w; ++k) dst[k] += src[k];
      }
    }
  });
}

}  // namespace lcm::ad
