#include "lcm/pipelines/gradcheck.h"

#include "lcm/error.h"
#include "lcm/nn/gated.h"
#include "lcm/pipelines/pipelines.h"
#include "lcm/synthetic.h"

namespace lcm::pipelines {

using namespace lcm::ad;

std::vector<std::string> grad_check_components() {
  return {"char-cnn", "bilstm", "biaffine", "label-biaffine", "gate", "adapter", "encoder", "biaff", "mtl", "tagger",
          "hier"};
}

namespace {

void jitter(ParameterStore& store, std::uint64_t seed) {
  Rng rng = Rng(seed).split("jitter");
  for (auto& [name, p] : store.parameters()) {
    for (double& v : p.value.mutable_data()) v += rng.uniform(-0.1, 0.1);
  }
}

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::vector<double> v(r * c);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::matrix(r, c, std::move(v));
}

// Inputs are registered as parameters so their gradients are checked too.
Tensor input(ParameterStore& store, const std::string& name, std::size_t r, std::size_t c) {
  return store.add("input." + name, {r, c}, uniform_init(1.0));
}

}  // namespace

GradCheckResult grad_check_component(const std::string& component, const TrainConfig& config, std::size_t samples,
                                     double eps, std::uint64_t seed) {
  const Treebank data = gen_synthetic(seed + 101, 2, load_grammar(default_grammar_path()));
  const Sentence& sentence = data.sentences[0];
  nn::EncoderConfig enc = config.encoder_config();
  enc.dropout = 0.0;
  TrainConfig cfg = config;
  cfg.dropout = 0.0;
  Rng rng = Rng(seed).split("inputs");
  const nn::Mode eval = nn::Mode::kEval;
  const std::size_t d = enc.output_dim();

  ParameterStore store(seed);
  std::function<Tensor()> loss;
  // Keeps models alive for the duration of the check.
  std::optional<parser::BiaffineParser> parser_model;
  std::optional<tagger::TaggerModel> tagger_model;
  std::optional<tagger::HierMorphTagger> hier_model;
  ParameterStore* params = &store;

  if (component == "char-cnn") {
    auto cnn = std::make_shared<nn::CharCnn>(store, "", 12, enc.char_dim, enc.char_filters, enc.char_kernel);
    loss = [cnn] { return sum(tanh(nn::char_cnn_encode({3, 7}, *cnn))); };
  } else if (component == "bilstm") {
    auto layer = std::make_shared<nn::BiLstmLayer>(store, "lstm.", enc.input_dim(), enc.lstm_hidden);
    Tensor x = input(store, "x", 4, enc.input_dim());
    Tensor w = random_matrix(4, 2 * enc.lstm_hidden, rng);
    loss = [layer, x, w] { return sum(mul((*layer)(x), w)); };
  } else if (component == "biaffine") {
    auto arc = std::make_shared<nn::ArcBiaffine>(store, "arc", cfg.arc_mlp);
    Tensor dep = input(store, "dep", 3, cfg.arc_mlp), head = input(store, "head", 4, cfg.arc_mlp);
    loss = [arc, dep, head] { return cross_entropy_rows((*arc)(dep, head), std::vector<int>{0, 3, 1}); };
  } else if (component == "label-biaffine") {
    auto lab = std::make_shared<nn::LabelBiaffine>(store, "label", cfg.label_mlp, 5);
    Tensor dep = input(store, "dep", 3, cfg.label_mlp), head = input(store, "head", 3, cfg.label_mlp);
    loss = [lab, dep, head] { return cross_entropy_rows((*lab)(dep, head), std::vector<int>{4, 0, 2}); };
  } else if (component == "gate") {
    auto gate = std::make_shared<nn::GateCombiner>(store, "gate", 3, d);
    std::vector<Tensor> reps;
    for (int k = 0; k < 3; ++k) reps.push_back(input(store, "rep" + std::to_string(k), 4, d));
    Tensor w = random_matrix(4, d, rng);
    loss = [gate, reps, w] { return sum(mul((*gate)(reps), w)); };
  } else if (component == "adapter") {
    auto adapter = std::make_shared<nn::Adapter>(store, "adapter", d, cfg.adapter_bottleneck);
    Tensor x = input(store, "x", 4, d), w = random_matrix(4, d, rng);
    loss = [adapter, x, w] { return sum(mul(tanh(nn::adapter_forward(x, *adapter)), w)); };
  } else if (component == "encoder") {
    auto encoder = std::make_shared<nn::Encoder>(store, "enc.", enc, vocabs_of(data, 1));
    Tensor w = random_matrix(sentence.size() + 1, d, rng);
    loss = [encoder, w, &sentence, eval] { return sum(mul(encoder->encode(sentence, eval, Rng(0)).top, w)); };
  } else if (component == "biaff" || component == "mtl") {
    parser::ParserConfig pc = parser_config(cfg);
    pc.encoder = enc;
    Vocab tags;
    std::vector<int> targets;
    if (component == "mtl") {
      pc.tag_head = true;
      const auto seqs = derive_treebank_tags(data, TagScheme::CT);
      tags = build_tag_vocab(seqs, 1);
      for (const auto& l : seqs[0].labels) targets.push_back(tags.lookup(l));
    }
    parser_model.emplace(pc, vocabs_of(data, 1), parser::relation_inventory(data), seed, tags);
    params = &parser_model->store();
    const parser::BiaffineParser* m = &*parser_model;
    loss = [m, &sentence, targets, eval] {
      return targets.empty() ? m->loss(sentence, eval, Rng(0)) : m->loss(sentence, eval, Rng(0), nullptr, 1.0, &targets);
    };
  } else if (component == "tagger") {
    const TaggedCorpus corpus = make_tagged_corpus(data, TagScheme::CT);
    tagger_model.emplace(tagger_config(cfg), TagScheme::CT, vocabs_of(data, 1), build_tag_vocab(corpus.tags, 1), seed);
    params = &tagger_model->store();
    const tagger::TaggerModel* m = &*tagger_model;
    const std::vector<std::string> labels = corpus.tags[0].labels;
    loss = [m, &sentence, labels, eval] { return m->loss(sentence, labels, eval, Rng(0)); };
  } else if (component == "hier") {
    const auto labels = tagger::hier_labels(data);
    std::vector<Vocab> vocabs;
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<TagSequence> seqs;
      for (const auto& l : labels) seqs.push_back({tagger::HierMorphTagger::kTasks[k], l[k]});
      vocabs.push_back(build_tag_vocab(seqs, 1));
    }
    hier_model.emplace(tagger_config(cfg), vocabs_of(data, 1), vocabs, seed);
    params = &hier_model->store();
    const tagger::HierMorphTagger* m = &*hier_model;
    const auto first = labels[0];
    loss = [m, &sentence, first, eval] { return m->loss(sentence, first, eval, Rng(0)); };
  } else {
    std::string all;
    for (const auto& c : grad_check_components()) all += (all.empty() ? "" : ", ") + c;
    throw ConfigError("unknown grad-check component '" + component + "' (expected one of " + all + ")");
  }
  jitter(*params, seed);
  return grad_check(*params, loss, eps, samples, seed);
}

}  // namespace lcm::pipelines
