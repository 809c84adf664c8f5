#include <doctest.h>

#include <cmath>

#include "lcm/autodiff/grad_check.h"
#include "lcm/autodiff/ops.h"
#include "lcm/error.h"
#include "lcm/nn/encoder.h"
#include "lcm/nn/gated.h"
#include "lcm/nn/layers.h"
#include "support.h"

using namespace lcm;
using namespace lcm::ad;
using namespace lcm::nn;
using Vec = std::vector<double>;

static Vec values(const Tensor& t) { return Vec(t.data().begin(), t.data().end()); }

static double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

static Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(r * c);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::matrix(r, c, v);
}

static EncoderConfig small_encoder() {
  EncoderConfig c;
  c.word_dim = 8;
  c.char_dim = 4;
  c.char_filters = 6;
  c.lstm_hidden = 32;
  c.lstm_layers = 2;
  c.dropout = 0.33;
  return c;
}

TEST_CASE("char CNN") {
  ParameterStore store(1);
  CharCnn cnn(store, "char_", 10, 4, 5, 3);
  SUBCASE("short and long words give the same shape") {
    CHECK(cnn.pad({3}).size() >= 3);
    CHECK(cnn.encode({3}).shape() == cnn.encode({2, 3, 4, 5, 6, 7, 8, 9, 2, 3}).shape());
    CHECK(cnn.encode({3}).cols() == 5);
  }
  SUBCASE("zero filters give a zero vector") {
    for (auto& x : cnn.conv_w.mutable_data()) x = 0.0;
    CHECK(values(cnn.encode({4, 5, 6})) == Vec(5, 0.0));
  }
  SUBCASE("gradient on a two-character word") {
    const auto r = grad_check(store, [&] { return sum(tanh(char_cnn_encode({4, 7}, cnn))); }, 1e-5, 20);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("encoder shapes and determinism") {
  const Sentence r = lcm::testing::sentence_r();
  const EncoderVocabs vocabs = EncoderVocabs::build({&r}, 1);
  ParameterStore store(2);
  Encoder enc(store, "enc.", small_encoder(), vocabs);
  const Rng rng(3);
  const auto out = enc.encode(r, Mode::kEval, rng);
  CHECK(out.top.shape() == Shape{4, 64});
  CHECK(out.layers.size() == 2);
  CHECK(values(enc.encode(r, Mode::kEval, rng).top) == values(out.top));
  CHECK(values(enc.encode(r, Mode::kTrain, rng).top) != values(out.top));
  Sentence one = r;
  one.tokens.resize(1);
  one.tokens[0].head = 0;
  const auto single = enc.encode(one, Mode::kEval, rng);
  CHECK(single.top.shape() == Shape{2, 64});
  for (double x : single.top.data()) CHECK(std::isfinite(x));
}

TEST_CASE("BiLSTM gradient") {
  ParameterStore store(4);
  BiLstmLayer layer(store, "lstm.", 3, 4);
  const Tensor x = random_matrix(3, 3, 5);
  const auto r = grad_check(store, [&] { return sum(tanh(layer(x))); }, 1e-5, 30);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("biaffine scoring") {
  const Tensor ones = Tensor::matrix(1, 2, {1, 1});
  const Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
  const Tensor zu = Tensor::matrix(2, 1, {0, 0});
  const Tensor zb = Tensor::matrix(1, 1, {0});
  CHECK(biaffine(ones, ones, eye, zu, zb).item() == 2.0);
  CHECK(biaffine(ones, ones, Tensor::zeros({2, 2}), zu, zb).item() == 0.0);
  const Tensor u = random_matrix(3, 3, 7);
  const Tensor a = random_matrix(1, 3, 8), b = random_matrix(1, 3, 9);
  const Tensor u0 = Tensor::zeros({3, 1}), b0 = Tensor::zeros({1, 1});
  CHECK(biaffine(a, b, u, u0, b0).item() != doctest::Approx(biaffine(b, a, u, u0, b0).item()));
}

TEST_CASE("gate identities") {
  ParameterStore store(6);
  const Tensor r1 = random_matrix(5, 4, 1), r2 = random_matrix(5, 4, 2), r3 = random_matrix(5, 4, 3);
  SUBCASE("single encoder is the identity") {
    GateCombiner g(store, "g1", 1, 4);
    CHECK(max_abs_diff(g({r1}), r1) == 0.0);
  }
  SUBCASE("identical reps pass through") {
    GateCombiner g(store, "g2", 2, 4);
    CHECK(max_abs_diff(g({r1, r1}), r1) < 1e-12);
  }
  SUBCASE("zero scores give the mean") {
    GateCombiner g(store, "g3", 3, 4);
    for (auto& w : g.w)
      for (auto& x : w.mutable_data()) x = 0.0;
    const Tensor mean_rep = scale(add(add(r1, r2), r3), 1.0 / 3.0);
    CHECK(max_abs_diff(g({r1, r2, r3}), mean_rep) < 1e-12);
    const Tensor alphas = g.alphas({r1, r2, r3});
    for (double a : alphas.data()) CHECK(a == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("disabled encoders get exactly zero weight") {
    GateCombiner g(store, "g4", 3, 4);
    g.set_disabled(1, true);
    g.set_disabled(2, true);
    CHECK(max_abs_diff(g({r1, r2, r3}), r1) == 0.0);
  }
  SUBCASE("elementwise variant") {
    GateCombiner g(store, "g5", 2, 4, GateVariant::kElementwiseSigmoid);
    CHECK(g({r1, r2}).shape() == r1.shape());
    CHECK_THROWS_AS(GateCombiner(store, "g6", 3, 4, GateVariant::kElementwiseSigmoid), ConfigError);
  }
  SUBCASE("gradient through the gate") {
    GateCombiner g(store, "g7", 3, 4);
    const auto r = grad_check(store, [&] { return sum(tanh(g({r1, r2, r3}))); }, 1e-5, 0);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("adapter") {
  ParameterStore store(8);
  Adapter a(store, "ad", 6, 3);
  const Tensor h = random_matrix(4, 6, 4);
  CHECK(max_abs_diff(a(h), h) == 0.0);
  for (auto& x : a.up.weight.mutable_data()) x = 0.3;
  CHECK(a(h).shape() == h.shape());
  const auto r = grad_check(store, [&] { return sum(tanh(adapter_forward(h, a))); }, 1e-5, 0);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("gated encoder roster and parameter names") {
  const Sentence r = lcm::testing::sentence_r();
  const EncoderVocabs vocabs = EncoderVocabs::build({&r}, 1);
  std::vector<AuxEncoderSpec> aux = {{"MT", small_encoder(), vocabs}, {"CT", small_encoder(), vocabs}};
  ParameterStore store(9);
  GatedEncoder g(store, small_encoder(), vocabs, aux);
  CHECK(g.roster() == std::vector<std::string>{"P", "MT", "CT"});
  CHECK(g.gate->k() == 3);
  CHECK(store.count("aux.MT.") == store.count("enc."));
  CHECK(g.encode(r, Mode::kEval, Rng(1)).shape() == Shape{4, 64});
  ParameterStore plain(9);
  GatedEncoder p(plain, small_encoder(), vocabs, {});
  CHECK(p.roster() == std::vector<std::string>{"P"});
  CHECK_FALSE(p.gate.has_value());
}
