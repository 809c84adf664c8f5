#include <doctest.h>

#include <cmath>
#include <fstream>

#include "lcm/autodiff/adam.h"
#include "lcm/autodiff/checkpoint.h"
#include "lcm/autodiff/grad_check.h"
#include "lcm/autodiff/ops.h"
#include "lcm/autodiff/parameter_store.h"
#include "lcm/error.h"
#include "support.h"

using namespace lcm;
using namespace lcm::ad;
using Vec = std::vector<double>;

static Vec values(const Tensor& t) { return Vec(t.data().begin(), t.data().end()); }
static Vec grads(const Tensor& t) { return Vec(t.grad().begin(), t.grad().end()); }

TEST_CASE("basic forward values") {
  CHECK(values(softmax(Tensor::matrix(1, 2, {0, 0}), 1)) == Vec{0.5, 0.5});
  const Tensor a = Tensor::matrix(2, 2, {1, 2, 3, 4});
  CHECK(values(matmul(a, Tensor::matrix(2, 2, {1, 0, 0, 1}))) == Vec{1, 2, 3, 4});
  CHECK(cross_entropy(Tensor::matrix(1, 3, {0, 0, 0}), 1).item() == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  const Tensor ce = cross_entropy_rows(Tensor::matrix(2, 2, {0, 0, 5, -5}), std::vector<int>{0, -1});
  CHECK(ce.item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("basic gradients") {
  Tensor w = Tensor::from({3}, {1, 2, 3}, true);
  backward(sum(w));
  CHECK(grads(w) == Vec{1, 1, 1});
  Tensor v = Tensor::from({2}, {2, -1}, true);
  backward(sum(mul(v, v)));
  CHECK(grads(v) == Vec{4, -2});
}

TEST_CASE("masked softmax gives exact zeros") {
  const double inf = std::numeric_limits<double>::infinity();
  const Vec p = values(softmax(Tensor::matrix(1, 3, {1.0, -inf, 2.0}), 1));
  CHECK(p[1] == 0.0);
  CHECK(p[0] + p[2] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("shape mismatches are contract errors") {
  CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), ShapeError);
  CHECK_THROWS_AS(add(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})), ShapeError);
}

TEST_CASE("gradient checks") {
  SUBCASE("quadratic in one parameter") {
    ParameterStore store(1);
    Tensor x = store.add("x", {1}, constant_init(0.7));
    const auto r = grad_check(store, [&] { return mul(mul(x, x), Tensor::scalar(3.0)); }, 1e-5, 0);
    CHECK(r.max_rel_error < 1e-8);
  }
  SUBCASE("two-layer tanh MLP") {
    ParameterStore store(2);
    Tensor w1 = store.add("w1", {3, 4}, uniform_init(1.0));
    Tensor w2 = store.add("w2", {4, 2}, uniform_init(1.0));
    const Tensor in = Tensor::matrix(2, 3, {0.5, -1, 2, 1, 0.25, -0.5});
    const auto r = grad_check(store, [&] {
      return cross_entropy_rows(matmul(tanh(matmul(in, w1)), w2), std::vector<int>{1, 0});
    }, 1e-5, 10);
    CHECK(r.checked == 10);
    CHECK(r.max_rel_error < 1e-4);
  }
  SUBCASE("every op") {
    ParameterStore store(3);
    Tensor a = store.add("a", {3, 4}, uniform_init(1.0));
    Tensor b = store.add("b", {4, 4}, uniform_init(1.0));
    Tensor e = store.add("e", {5, 4}, uniform_init(1.0));
    const std::vector<int> ids = {4, 0, 2};
    const auto r = grad_check(store, [&] {
      Tensor h = add(matmul(a, b), embedding_lookup(e, ids));
      Tensor s = concat({sigmoid(h), relu(h), exp(scale(h, 0.1))}, 1);
      Tensor u = unfold_rows(s, 2);
      Tensor m = max_over_axis(slice(u, 1, 0, 8), 0);
      Tensor l = log(add(softmax(h, 1), Tensor::scalar(1.0)));
      Tensor bil = row_bilinear(h, reshape(b, {1, 4, 4}), h);
      return add(add(sum(m), mean(l)), add(sum(log_softmax(h, 0)), sum(bil)));
    }, 1e-5, 0);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("adam") {
  SUBCASE("first step moves by exactly lr") {
    ParameterStore store;
    Tensor w = store.add("w", {1}, zeros_init());
    w.mutable_grad()[0] = 1.0;
    adam_step(store, AdamConfig{});
    CHECK(w.data()[0] == doctest::Approx(-0.002).epsilon(1e-9));
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    ParameterStore store;
    Tensor w = store.add("w", {2}, constant_init(0.5));
    w.mutable_grad();
    adam_step(store, AdamConfig{});
    CHECK(values(w) == Vec{0.5, 0.5});
  }
  SUBCASE("frozen parameters and lr scales") {
    ParameterStore store;
    Tensor f = store.add("frozen.w", {1}, zeros_init());
    Tensor h = store.add("half.w", {1}, zeros_init());
    store.set_trainable("frozen.", false);
    store.set_lr_scale("half.", 0.5);
    CHECK_FALSE(f.requires_grad());
    f.mutable_grad()[0] = 1.0;
    h.mutable_grad()[0] = 1.0;
    adam_step(store, AdamConfig{});
    CHECK(f.data()[0] == 0.0);
    CHECK(h.data()[0] == doctest::Approx(-0.001).epsilon(1e-9));
  }
  SUBCASE("identical runs are bit-identical") {
    auto train = [] {
      ParameterStore store(5);
      Tensor w = store.add("w", {4, 3}, xavier_init(4, 3));
      const Tensor x = Tensor::matrix(2, 4, {1, 2, 3, 4, -1, 0, 1, 0});
      for (int i = 0; i < 20; ++i) {
        backward(cross_entropy_rows(matmul(x, w), std::vector<int>{0, 2}));
        adam_step(store, AdamConfig{});
      }
      return values(w);
    };
    CHECK(train() == train());
  }
}

TEST_CASE("parameter store") {
  ParameterStore a(9), b(9);
  a.add("x.w", {2, 2}, uniform_init(1.0));
  a.add("y.w", {3}, uniform_init(1.0));
  b.add("y.w", {3}, uniform_init(1.0));
  b.add("x.w", {2, 2}, uniform_init(1.0));
  // Initial values depend on (seed, name) only.
  CHECK(values(a.get("x.w")) == values(b.get("x.w")));
  CHECK(a.count() == 7);
  CHECK(a.count("x.") == 4);
  CHECK_THROWS_AS(a.add("x.w", {1}, zeros_init()), ContractError);
  const Snapshot snap = a.snapshot();
  a.at("x.w").value.mutable_data()[0] = 42.0;
  a.restore(snap);
  CHECK(values(a.get("x.w")) == values(b.get("x.w")));
  ParameterStore c(1);
  c.add("z.w", {2, 2}, zeros_init());
  c.copy_from(a, "x.", "z.");
  CHECK(values(c.get("z.w")) == values(a.get("x.w")));
}

TEST_CASE("checkpoint round trip and corruption") {
  const std::string dir = lcm::testing::scratch_dir("checkpoint");
  const std::string path = dir + "/p.ckpt";
  ParameterStore a(4);
  a.add("w", {2, 3}, uniform_init(1.0));
  a.add("b", {3}, uniform_init(1.0));
  save_checkpoint(a, path);
  ParameterStore b(5);
  b.add("w", {2, 3}, zeros_init());
  b.add("b", {3}, zeros_init());
  load_checkpoint(b, path);
  CHECK(values(b.get("w")) == values(a.get("w")));
  CHECK(values(b.get("b")) == values(a.get("b")));

  ParameterStore wrong(5);
  wrong.add("w", {3, 2}, zeros_init());
  wrong.add("b", {3}, zeros_init());
  CHECK_THROWS_AS(load_checkpoint(wrong, path), CheckpointError);

  std::string bytes = lcm::testing::slurp(path);
  bytes[bytes.size() / 2] ^= 0x5a;
  lcm::testing::spit(path, bytes);
  CHECK_THROWS_AS(read_checkpoint(path), CheckpointError);

  std::string versioned = serialize_parameters(a);
  versioned[8] = 9;
  try {
    deserialize_parameters(versioned);
    FAIL("expected a version error");
  } catch (const CheckpointError& e) {
    const std::string what = e.what();
    CHECK(what.find("version 9") != std::string::npos);
    CHECK(what.find("version 1") != std::string::npos);
  }
}

TEST_CASE("rng streams") {
  Rng a(3), b(3);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng(3).split("x").key() == Rng(3).split("x").key());
  CHECK(Rng(3).split("x").key() != Rng(3).split("y").key());
  CHECK(Rng(3).split(1).key() != Rng(3).split(2).key());
  Rng u(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
  }
}
