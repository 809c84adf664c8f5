#include <doctest.h>

#include <cmath>

#include "lcm/error.h"
#include "lcm/pipelines/pipelines.h"
#include "lcm/tagger/tagger.h"
#include "support.h"

using namespace lcm;
using namespace lcm::tagger;

static TaggerConfig desk_tagger() { return pipelines::tagger_config(pipelines::TrainConfig::desk()); }

static TrainOptions desk_options(std::size_t epochs) {
  TrainOptions o;
  o.epochs = epochs;
  o.batch_size = 4;
  return o;
}

static void zero_prefix(ad::ParameterStore& store, const std::string& prefix) {
  for (const auto& name : store.names(prefix))
    for (auto& x : store.at(name).value.mutable_data()) x = 0.0;
}

TEST_CASE("defaults") {
  const TrainOptions o;
  CHECK(o.batch_size == 16);
  CHECK(o.epochs == 100);
  CHECK(o.adam.lr == 0.002);
  CHECK(pipelines::TrainConfig::paper().dropout == 0.33);
  CHECK(pipelines::tagger_config(pipelines::TrainConfig::paper()).encoder.dropout == 0.33);
}

TEST_CASE("tag distributions") {
  const Treebank tb = lcm::testing::treebank_of({lcm::testing::sentence_r()});
  const TaggedCorpus c = make_tagged_corpus(tb, TagScheme::CT);
  TaggerModel m(desk_tagger(), TagScheme::CT, pipelines::vocabs_of(tb, 1), build_tag_vocab(c.tags, 1), 1);
  const auto p = tagger_forward(tb.sentences[0], m, nn::Mode::kEval, Rng(1));
  CHECK(p.shape() == ad::Shape{3, m.tags().size()});
  for (std::size_t i = 0; i < 3; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < p.cols(); ++k) total += p.at(i, k);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto again = tagger_forward(tb.sentences[0], m, nn::Mode::kEval, Rng(1));
  CHECK(std::equal(p.data().begin(), p.data().end(), again.data().begin()));
  zero_prefix(m.store(), "head.out.");
  const auto u = tagger_forward(tb.sentences[0], m, nn::Mode::kEval, Rng(1));
  for (double x : u.data()) CHECK(x == doctest::Approx(1.0 / static_cast<double>(m.tags().size())).epsilon(1e-12));
}

TEST_CASE("CT tagger fits five copies of R") {
  const Sentence r = lcm::testing::sentence_r();
  const TaggedCorpus c = make_tagged_corpus(lcm::testing::treebank_of({r, r, r, r, r}), TagScheme::CT);
  const TaggerModel m = train_tagger(c, nullptr, desk_tagger(), desk_options(50), nullptr, 1);
  CHECK(tag_metrics(predict_tags(m, c.sentences), c.tags).accuracy == 1.0);
}

TEST_CASE("same seed, same dev trajectory; checkpoint round trip") {
  const TaggedCorpus train = make_tagged_corpus(lcm::testing::synthetic(1, 12), TagScheme::CT);
  const TaggedCorpus dev = make_tagged_corpus(lcm::testing::synthetic(2, 6), TagScheme::CT);
  TrainHistory h1, h2;
  const TaggerModel a = train_tagger(train, &dev, desk_tagger(), desk_options(4), &h1);
  const TaggerModel b = train_tagger(train, &dev, desk_tagger(), desk_options(4), &h2);
  CHECK(h1.dev_accuracy == h2.dev_accuracy);
  CHECK(h1.dev_accuracy.size() == 4);
  const std::string dir = lcm::testing::scratch_dir("tagger");
  a.save(dir + "/t.ckpt");
  const TaggerModel back = TaggerModel::load(dir + "/t.ckpt");
  CHECK(back.scheme() == TagScheme::CT);
  CHECK(predict_tags(back, dev.sentences) == predict_tags(a, dev.sentences));
}

TEST_CASE("tag metrics") {
  const std::vector<TagSequence> gold = {{TagScheme::CT, {"a", "a", "b"}}};
  const std::vector<TagSequence> pred = {{TagScheme::CT, {"a", "b", "b"}}};
  const TagMetrics m = tag_metrics(pred, gold);
  CHECK(m.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  const TagMetrics same = tag_metrics(gold, gold);
  CHECK(same.accuracy == 1.0);
  CHECK(same.macro_f1 == 1.0);
  CHECK_THROWS_AS(tag_metrics({}, {}), ContractError);
  CHECK_THROWS_AS(tag_metrics(pred, {}), ContractError);
}

TEST_CASE("hierarchical morphology tagger") {
  const Treebank tb = lcm::testing::synthetic(3, 10);
  TrainOptions opts = desk_options(150);
  opts.batch_size = 2;
  const HierMorphTagger m = train_hier_morph_tagger(tb, nullptr, desk_tagger(), opts, 1);
  const auto layers = extract_layers(m);
  REQUIRE(layers.size() == 3);
  CHECK(layers[0] == "enc.lstm0.");
  CHECK(layers[2] == "enc.lstm2.");
  for (double acc : hier_accuracy(m, tb)) CHECK(acc == 1.0);

  HierMorphTagger z = HierMorphTagger::load([&] {
    const std::string dir = lcm::testing::scratch_dir("hier");
    m.save(dir + "/h.ckpt");
    return dir + "/h.ckpt";
  }());
  CHECK(hier_accuracy(z, tb) == hier_accuracy(m, tb));
  zero_prefix(z.store(), "head.");
  const auto logits = z.logits(tb.sentences[0], nn::Mode::kEval, Rng(1));
  REQUIRE(logits.size() == 3);
  for (const auto& l : logits)
    for (double x : l.data()) CHECK(x == 0.0);
}
