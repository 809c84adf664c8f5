#include "lcm/pipelines/pipelines.h"

#include <filesystem>
#include <fstream>

#include "lcm/error.h"
#include "lcm/parser/train.h"

namespace lcm::pipelines {

namespace fs = std::filesystem;
using nlohmann::json;
using parser::BiaffineParser;
using parser::ParserCorpus;
using tagger::TaggerModel;

// ---- run context ----

void RunContext::log(const std::string& line) const {
  if (!quiet && sink) sink(line);
  if (writes()) {
    fs::create_directories(run_dir);
    std::ofstream out(path("log.txt"), std::ios::app);
    out << line << "\n";
  }
}

std::string RunContext::path(const std::string& relative) const { return (fs::path(run_dir) / relative).string(); }

namespace {

void write_text(const RunContext& ctx, const std::string& relative, const std::string& text) {
  if (!ctx.writes()) return;
  const fs::path p = ctx.path(relative);
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
}

std::string checkpoint_path(const RunContext& ctx, const std::string& name) {
  fs::create_directories(ctx.path("checkpoints"));
  return ctx.path("checkpoints/" + name + ".ckpt");
}

std::uint64_t stream_seed(const TrainConfig& config, const std::string& purpose) {
  return Rng(config.seed).split(purpose).key();
}

Treebank limit_extra(const Treebank& extra, const TrainConfig& config) {
  Treebank out = extra;
  if (config.extra_sentences > 0 && out.sentences.size() > config.extra_sentences) {
    out.sentences.resize(config.extra_sentences);
  }
  return out;
}

void require_extra(const PipelineData& data, const std::string& variant) {
  if (data.extra.size() == 0) throw ConfigError("variant " + variant + " needs extra data (--extra)");
}

void apply_word_vectors(BiaffineParser& model, const PipelineSpec& spec, const RunContext& ctx) {
  if (spec.word_vectors.empty()) return;
  const std::size_t set = model.encoder().main.set_word_vectors(nn::load_word_vectors(spec.word_vectors));
  ctx.log("loaded " + std::to_string(set) + " pretrained word vectors");
}

json history_json(const parser::ParserTrainHistory& h) {
  return {{"best_epoch", h.best_epoch + 1}, {"best_dev_las", h.best_dev_las}};
}

// Trains, evaluates on dev and test, and saves the checkpoint.
RunResult finish_parser(const std::string& name, BiaffineParser model, const ParserCorpus& train,
                        const ParserCorpus& dev, const ParserCorpus& test, const TrainConfig& config,
                        const RunContext& ctx, double tag_weight = 0.0,
                        std::function<void(std::size_t, BiaffineParser&)> on_epoch = {}) {
  ctx.log("[" + name + "] training parser on " + std::to_string(train.size()) + " sentences, roster " +
          json(model.encoder().roster()).dump());
  parser::ParserTrainOptions options = parser_options(config, ctx);
  options.tag_weight = tag_weight;
  options.on_epoch_start = std::move(on_epoch);
  const parser::ParserTrainHistory history = parser::train_parser(model, train, dev.size() ? &dev : nullptr, options);
  RunResult r;
  r.name = name;
  r.test = parser::evaluate_parser(model, test, config.punct);
  if (dev.size()) r.dev = parser::evaluate_parser(model, dev, config.punct);
  r.details["training"] = history_json(history);
  r.details["roster"] = model.encoder().roster();
  ctx.log("[" + name + "] test UAS " + eval::format_score(r.test.uas) + " LAS " + eval::format_score(r.test.las));
  if (ctx.writes()) model.save(checkpoint_path(ctx, name));
  r.model.emplace(std::move(model));
  return r;
}

ParserCorpus corpus_of(const Treebank& tb) { return ParserCorpus{&tb, {}, {}}; }

std::vector<std::string> sentence_tags(const Sentence& s) { return derive_tags(s, TagScheme::MT).labels; }

TaggerModel train_scheme_tagger(const std::string& name, const TaggedCorpus& train, const Treebank& dev,
                                const TrainConfig& config, const RunContext& ctx, json& details) {
  const TaggedCorpus dev_corpus = make_tagged_corpus(dev, train.scheme);
  write_text(ctx, "tags/" + name + ".tsv", write_tag_tsv(train));
  ctx.log("[tagger " + name + "] training on " + std::to_string(train.size()) + " sentences");
  tagger::TrainOptions options = tagger_options(config, ctx);
  options.seed = stream_seed(config, "tagger." + name);
  tagger::TrainHistory history;
  TaggerModel model = tagger::train_tagger(train, dev_corpus.size() ? &dev_corpus : nullptr, tagger_config(config),
                                           options, &history, config.min_word_freq);
  json entry = {{"train_sentences", train.size()}, {"best_epoch", history.best_epoch + 1}};
  if (dev_corpus.size()) {
    const auto m = tagger::tag_metrics(tagger::predict_tags(model, dev_corpus.sentences), dev_corpus.tags);
    entry["dev_accuracy"] = m.accuracy;
    entry["dev_macro_f1"] = m.macro_f1;
    ctx.log("[tagger " + name + "] dev accuracy " + eval::format_score(100.0 * m.accuracy));
  }
  details["taggers"][name] = entry;
  if (ctx.writes()) model.save(checkpoint_path(ctx, "tagger." + name));
  return model;
}

TaggedCorpus concat_corpora(TaggedCorpus a, const TaggedCorpus& b) {
  a.sentences.insert(a.sentences.end(), b.sentences.begin(), b.sentences.end());
  a.tags.insert(a.tags.end(), b.tags.begin(), b.tags.end());
  return a;
}

// Self-training encoders: auto-parse the extra data with `base`, derive the
// schemes from those trees (morphological schemes from the tokens), train one
// tagger per scheme on the extra data alone.
std::vector<AuxTagger> self_training_taggers(const BiaffineParser& base, const PipelineData& data,
                                             const std::vector<TagScheme>& schemes, const TrainConfig& config,
                                             const RunContext& ctx, json& details) {
  Treebank raw = limit_extra(data.extra, config);
  for (auto& s : raw.sentences) {
    for (auto& t : s.tokens) {
      t.head = 0;
      t.deprel = "_";
    }
  }
  std::size_t invalid = 0;
  const Treebank parsed = auto_parse(base, raw, &invalid);
  details["auto_parsed"] = {{"sentences", parsed.size()}, {"invalid_trees", invalid}};
  if (invalid > 0) throw ContractError("auto-parsed extra data contains " + std::to_string(invalid) + " invalid trees");
  write_text(ctx, "tags/auto_parsed.conllu", write_conllu(parsed));
  std::vector<AuxTagger> out;
  for (TagScheme scheme : schemes) {
    const std::string name(scheme_name(scheme));
    out.push_back({name, train_scheme_tagger(name, make_tagged_corpus(parsed, scheme), data.dev, config, ctx,
                                             details)});
  }
  return out;
}

// Encoders added by the self-training family to any variant.
std::vector<AuxTagger> family_taggers(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                                      const RunContext& ctx, json& details) {
  if (spec.family != Family::kDcst) return {};
  require_extra(data, "family dcst");
  PipelineSpec base_spec = spec;
  base_spec.run_name = "family_base";
  RunResult base = run_base(data, base_spec, config, ctx);
  return self_training_taggers(*base.model, data,
                               {TagScheme::RD, TagScheme::NC, TagScheme::RP, TagScheme::LM}, config, ctx, details);
}

void attach_aux(parser::ParserConfig& pc, const std::vector<AuxTagger>& aux) {
  for (const auto& a : aux) pc.aux.push_back({a.name, a.model.config().encoder, a.model.encoder().vocabs()});
}

void load_aux(BiaffineParser& model, const std::vector<AuxTagger>& aux, const TrainConfig& config) {
  for (std::size_t i = 0; i < aux.size(); ++i) {
    const std::string prefix = nn::GatedEncoder::aux_prefix(aux[i].name);
    model.store().copy_from(aux[i].model.store(), "enc.", prefix);
    if (config.freeze_pretrained) model.store().set_trainable(prefix, false);
    if (config.disable_aux_gates && model.encoder().gate) model.encoder().gate->set_disabled(i + 1, true);
  }
}

}  // namespace

// ---- building blocks ----

PipelineData load_pipeline_data(const PipelineSpec& spec) {
  if (spec.train.empty()) throw ConfigError("missing --train");
  if (spec.test.empty()) throw ConfigError("missing --test");
  PipelineData d;
  d.train = read_conllu_file(spec.train);
  d.test = read_conllu_file(spec.test);
  if (!spec.dev.empty()) d.dev = read_conllu_file(spec.dev);
  if (!spec.extra.empty()) d.extra = read_conllu_file(spec.extra);
  return d;
}

parser::ParserConfig parser_config(const TrainConfig& config) {
  parser::ParserConfig pc;
  pc.encoder = config.encoder_config();
  pc.arc_mlp = config.arc_mlp;
  pc.label_mlp = config.label_mlp;
  pc.gate_variant = config.gate_variant;
  pc.adapter_bottleneck = config.adapter_bottleneck;
  pc.single_root = config.single_root;
  pc.head_fc1 = config.fc1;
  pc.head_fc2 = config.fc2;
  return pc;
}

tagger::TaggerConfig tagger_config(const TrainConfig& config) {
  return {config.encoder_config(), config.fc1, config.fc2};
}

parser::ParserTrainOptions parser_options(const TrainConfig& config, const RunContext& ctx) {
  parser::ParserTrainOptions o;
  o.epochs = config.epochs;
  o.batch_size = config.batch_size;
  o.adam.lr = config.lr;
  o.seed = config.seed;
  o.punct = config.punct;
  o.log = [&ctx](const std::string& line) { ctx.log("  " + line); };
  return o;
}

tagger::TrainOptions tagger_options(const TrainConfig& config, const RunContext& ctx) {
  tagger::TrainOptions o;
  o.epochs = config.tagger_epochs;
  o.batch_size = config.batch_size;
  o.adam.lr = config.lr;
  o.seed = config.seed;
  o.log = [&ctx](const std::string& line) { ctx.log("  " + line); };
  return o;
}

nn::EncoderVocabs vocabs_of(const Treebank& treebank, std::size_t min_word_freq) {
  std::vector<const Sentence*> ptrs;
  for (const auto& s : treebank.sentences) ptrs.push_back(&s);
  return nn::EncoderVocabs::build(ptrs, min_word_freq);
}

BiaffineParser build_gated_parser(const TrainConfig& config, const nn::EncoderVocabs& vocabs,
                                  const std::vector<std::string>& relations, const std::vector<AuxTagger>& aux) {
  parser::ParserConfig pc = parser_config(config);
  attach_aux(pc, aux);
  BiaffineParser model(pc, vocabs, relations, config.seed);
  load_aux(model, aux, config);
  return model;
}

Treebank auto_parse(const BiaffineParser& model, const Treebank& treebank, std::size_t* invalid) {
  std::vector<parser::ParseTree> trees;
  trees.reserve(treebank.size());
  for (const auto& s : treebank.sentences) trees.push_back(model.predict(s));
  Treebank out = parser::apply_trees(treebank, trees);
  std::size_t bad = 0;
  for (const auto& s : out.sentences) bad += validate_tree(s).ok() ? 0 : 1;
  if (invalid) *invalid = bad;
  return out;
}

std::size_t architecture_parameter_count(const ad::ParameterStore& store) {
  std::size_t total = 0;
  for (const auto& [name, p] : store.parameters()) {
    if (name.ends_with("word_emb") || name.ends_with("char_emb") || name.ends_with("tag_emb")) continue;
    total += p.value.size();
  }
  return total;
}

std::string schedule_name(Schedule s) {
  switch (s) {
    case Schedule::kFe: return "FE";
    case Schedule::kFea: return "FEA";
    case Schedule::kUf: return "UF";
    case Schedule::kDl: return "DL";
    case Schedule::kFt: return "FT";
  }
  return "?";
}

namespace {

// Prefixes of the pretrained part of a TranSeq encoder, bottom first: the
// input layer, then the three copied BiLSTM layers.
std::vector<std::vector<std::string>> pretrained_groups(const nn::Encoder& enc) {
  std::vector<std::vector<std::string>> groups = {enc.input_prefixes()};
  for (std::size_t l = 0; l < tagger::HierMorphTagger::kLayers; ++l) groups.push_back({enc.layer_prefix(l)});
  return groups;
}

void set_group(BiaffineParser& model, const std::vector<std::string>& prefixes, bool trainable) {
  for (const auto& p : prefixes) model.store().set_trainable(p, trainable);
}

}  // namespace

BiaffineParser build_transeq_parser(const TrainConfig& config, const tagger::HierMorphTagger& source,
                                    const std::vector<std::string>& relations, Schedule schedule) {
  parser::ParserConfig pc = parser_config(config);
  pc.encoder = source.config().encoder;
  pc.encoder.dropout = config.dropout;
  pc.encoder.lstm_layers = tagger::HierMorphTagger::kLayers + 1;
  if (schedule == Schedule::kFea) pc.adapters_after = {0, 1};
  BiaffineParser model(pc, source.encoder().vocabs(), relations, config.seed);
  model.store().copy_from(source.store(), "enc.", "enc.");
  const auto groups = pretrained_groups(model.encoder().main);
  switch (schedule) {
    case Schedule::kFe:
    case Schedule::kFea:
    case Schedule::kUf:
      for (const auto& g : groups) set_group(model, g, false);
      break;
    case Schedule::kDl: {
      // Layer 2 keeps the base rate; each step down divides by the factor,
      // and the input layer shares the bottom layer's rate.
      const double f = config.lr_decay_factor;
      const double scales[] = {1.0 / (f * f), 1.0 / (f * f), 1.0 / f, 1.0};
      for (std::size_t g = 0; g < groups.size(); ++g) {
        for (const auto& p : groups[g]) model.store().set_lr_scale(p, scales[g]);
      }
      break;
    }
    case Schedule::kFt:
      break;
  }
  return model;
}

std::function<void(std::size_t, BiaffineParser&)> transeq_schedule(const TrainConfig& config, Schedule schedule) {
  if (schedule != Schedule::kUf) return {};
  const std::size_t interval = config.unfreeze_interval;
  return [interval](std::size_t epoch, BiaffineParser& model) {
    const auto groups = pretrained_groups(model.encoder().main);
    const std::size_t steps = epoch / interval;  // layers unfrozen so far, top down
    // groups: 0 input, 1..3 layers 0..2. Step 1 frees layer 2, step 2 layer 1,
    // step 3 layer 0 with the input layer.
    set_group(model, groups[3], steps >= 1);
    set_group(model, groups[2], steps >= 2);
    set_group(model, groups[1], steps >= 3);
    set_group(model, groups[0], steps >= 3);
  };
}

std::vector<double> pretrained_layer_lrs(const BiaffineParser& model, const TrainConfig& config) {
  std::vector<double> out;
  for (std::size_t k = tagger::HierMorphTagger::kLayers; k-- > 0;) {
    const std::string prefix = model.encoder().main.layer_prefix(k);
    const auto names = model.store().names(prefix);
    if (names.empty()) throw ContractError("no parameters under " + prefix);
    out.push_back(config.lr * model.store().at(names.front()).lr_scale);
  }
  return out;
}

// ---- variants ----

RunResult run_base(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                   const RunContext& ctx) {
  const std::string name = spec.run_name.empty() ? "base" : spec.run_name;
  BiaffineParser model(parser_config(config), vocabs_of(data.train, config.min_word_freq),
                       parser::relation_inventory(data.train), config.seed);
  apply_word_vectors(model, spec, ctx);
  return finish_parser(name, std::move(model), corpus_of(data.train), corpus_of(data.dev), corpus_of(data.test),
                       config, ctx);
}

RunResult run_base_star(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                        const RunContext& ctx) {
  TrainConfig deeper = config;
  deeper.encoder.lstm_layers = tagger::HierMorphTagger::kLayers + 1;
  PipelineSpec s = spec;
  if (s.run_name.empty()) s.run_name = "base_star";
  return run_base(data, s, deeper, ctx);
}

RunResult run_lcm(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                  const RunContext& ctx) {
  require_extra(data, "lcm");
  json details;
  PipelineSpec base_spec = spec;
  base_spec.run_name = "base";
  RunResult base = run_base(data, base_spec, config, ctx);
  details["base"] = eval::score_to_json("base", base.test, "");

  // Tree schemes on the extra data come from the base parser's output; the
  // morphological ones from the tokens themselves.
  const Treebank extra = limit_extra(data.extra, config);
  std::size_t invalid = 0;
  const Treebank parsed_extra = auto_parse(*base.model, extra, &invalid);
  details["auto_parsed"] = {{"sentences", parsed_extra.size()}, {"invalid_trees", invalid}};

  std::vector<AuxTagger> aux;
  for (TagScheme scheme : spec.effective_schemes()) {
    const std::string name(scheme_name(scheme));
    const TaggedCorpus corpus =
        concat_corpora(make_tagged_corpus(data.train, scheme), make_tagged_corpus(parsed_extra, scheme));
    aux.push_back({name, train_scheme_tagger(name, corpus, data.dev, config, ctx, details)});
  }
  for (auto& a : family_taggers(data, spec, config, ctx, details)) aux.push_back(std::move(a));

  BiaffineParser model = build_gated_parser(config, vocabs_of(data.train, config.min_word_freq),
                                            parser::relation_inventory(data.train), aux);
  apply_word_vectors(model, spec, ctx);
  RunResult r = finish_parser(spec.name(), std::move(model), corpus_of(data.train), corpus_of(data.dev),
                              corpus_of(data.test), config, ctx);
  details.update(r.details);
  r.details = details;
  return r;
}

RunResult run_dcst(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                   const RunContext& ctx) {
  require_extra(data, variant_name(spec.variant));
  json details;
  PipelineSpec base_spec = spec;
  base_spec.run_name = "base";
  RunResult base = run_base(data, base_spec, config, ctx);
  details["base"] = eval::score_to_json("base", base.test, "");
  std::vector<AuxTagger> aux = self_training_taggers(*base.model, data, spec.effective_schemes(), config, ctx, details);

  BiaffineParser model = build_gated_parser(config, vocabs_of(data.train, config.min_word_freq),
                                            parser::relation_inventory(data.train), aux);
  if (config.warm_start) model.store().copy_from(base.model->store(), "enc.", "enc.");
  apply_word_vectors(model, spec, ctx);
  RunResult r = finish_parser(spec.name(), std::move(model), corpus_of(data.train), corpus_of(data.dev),
                              corpus_of(data.test), config, ctx);
  details.update(r.details);
  r.details = details;
  return r;
}

RunResult run_mtl(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                  const RunContext& ctx) {
  json details;
  std::vector<AuxTagger> aux = family_taggers(data, spec, config, ctx, details);
  const std::vector<TagSequence> train_tags = derive_treebank_tags(data.train, TagScheme::CT);
  Vocab head_tags = build_tag_vocab(train_tags, 1);

  parser::ParserConfig pc = parser_config(config);
  pc.tag_head = true;
  attach_aux(pc, aux);
  BiaffineParser model(pc, vocabs_of(data.train, config.min_word_freq), parser::relation_inventory(data.train),
                       config.seed, head_tags);
  load_aux(model, aux, config);
  apply_word_vectors(model, spec, ctx);

  ParserCorpus train = corpus_of(data.train);
  for (const auto& seq : train_tags) {
    std::vector<int> ids;
    for (const auto& l : seq.labels) ids.push_back(head_tags.lookup(l));
    train.tag_targets.push_back(std::move(ids));
  }
  RunResult r = finish_parser(spec.name(), std::move(model), train, corpus_of(data.dev), corpus_of(data.test), config,
                              ctx, config.mtl_lambda);
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < data.train.size(); ++i) {
    const auto pred = r.model->predict_tags(data.train.sentences[i]);
    for (std::size_t t = 0; t < pred.size(); ++t) correct += pred[t] == train_tags[i].labels[t];
    total += pred.size();
  }
  details["ct_train_accuracy"] = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  details.update(r.details);
  r.details = details;
  return r;
}

RunResult run_mi(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config, MiMode mode,
                 const RunContext& ctx) {
  json details;
  std::vector<AuxTagger> aux = family_taggers(data, spec, config, ctx, details);
  auto gold_tags = [](const Treebank& tb) {
    std::vector<std::vector<std::string>> out;
    for (const auto& s : tb.sentences) out.push_back(sentence_tags(s));
    return out;
  };
  ParserCorpus train = corpus_of(data.train), dev = corpus_of(data.dev), test = corpus_of(data.test);
  train.tags = gold_tags(data.train);
  if (mode == MiMode::kOracle) {
    dev.tags = gold_tags(data.dev);
    test.tags = gold_tags(data.test);
  } else if (!spec.tags_file.empty()) {
    std::ifstream in(spec.tags_file, std::ios::binary);
    if (!in) throw DataError("cannot open tag file " + spec.tags_file);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const TaggedCorpus external = parse_tag_tsv(text, TagScheme::MT);
    if (external.size() != data.test.size()) {
      throw DataError(spec.tags_file + ": " + std::to_string(external.size()) + " sentences, test set has " +
                      std::to_string(data.test.size()));
    }
    for (std::size_t i = 0; i < external.size(); ++i) {
      if (external.tags[i].labels.size() != data.test.sentences[i].size()) {
        throw DataError(spec.tags_file + ": token count mismatch in sentence " + std::to_string(i + 1));
      }
      test.tags.push_back(external.tags[i].labels);
    }
    dev.tags = gold_tags(data.dev);
    details["tag_source"] = spec.tags_file;
  } else {
    const TaggerModel mt = train_scheme_tagger("MT", make_tagged_corpus(data.train, TagScheme::MT), data.dev, config,
                                               ctx, details);
    for (const auto& s : data.dev.sentences) dev.tags.push_back(mt.predict(s));
    for (const auto& s : data.test.sentences) test.tags.push_back(mt.predict(s));
    std::vector<TagSequence> pred, gold;
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      pred.push_back({TagScheme::MT, test.tags[i]});
      gold.push_back(derive_tags(data.test.sentences[i], TagScheme::MT));
    }
    if (!gold.empty()) {
      const double acc = tagger::tag_metrics(pred, gold).accuracy;
      details["mt_tagger_test_accuracy"] = acc;
      ctx.log("[predicted_mi] MT tagger test accuracy " + eval::format_score(100.0 * acc));
    }
  }

  parser::ParserConfig pc = parser_config(config);
  pc.encoder.tag_dim = config.tag_dim;
  attach_aux(pc, aux);
  nn::EncoderVocabs vocabs = vocabs_of(data.train, config.min_word_freq);
  std::vector<std::string> all_tags;
  for (const auto& t : train.tags) all_tags.insert(all_tags.end(), t.begin(), t.end());
  vocabs.tags = Vocab::build(all_tags, 1);
  BiaffineParser model(pc, std::move(vocabs), parser::relation_inventory(data.train), config.seed);
  load_aux(model, aux, config);
  apply_word_vectors(model, spec, ctx);
  RunResult r = finish_parser(spec.name(), std::move(model), train, dev, test, config, ctx);
  details.update(r.details);
  r.details = details;
  return r;
}

RunResult run_transeq(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                      Schedule schedule, const RunContext& ctx) {
  json details;
  std::optional<tagger::HierMorphTagger> source;
  if (!spec.hier_checkpoint.empty()) {
    try {
      source.emplace(tagger::HierMorphTagger::load(spec.hier_checkpoint));
    } catch (const CheckpointError& e) {
      throw ConfigError(std::string("TranSeq source tagger: ") + e.what());
    }
    details["hier_checkpoint"] = spec.hier_checkpoint;
  } else {
    Treebank morph = data.train;
    const Treebank extra = limit_extra(data.extra, config);
    morph.sentences.insert(morph.sentences.end(), extra.sentences.begin(), extra.sentences.end());
    ctx.log("[hier tagger] training on " + std::to_string(morph.size()) + " sentences");
    tagger::TrainOptions options = tagger_options(config, ctx);
    options.seed = stream_seed(config, "tagger.hier");
    source.emplace(tagger::train_hier_morph_tagger(morph, data.dev.size() ? &data.dev : nullptr,
                                                   tagger_config(config), options, config.min_word_freq));
    if (ctx.writes()) source->save(checkpoint_path(ctx, "tagger.hier"));
  }
  if (data.dev.size()) {
    const auto acc = tagger::hier_accuracy(*source, data.dev);
    details["hier_dev_accuracy"] = {{"number", acc[0]}, {"gender", acc[1]}, {"case", acc[2]}};
  }
  std::vector<AuxTagger> aux = family_taggers(data, spec, config, ctx, details);

  BiaffineParser model = [&] {
    try {
      BiaffineParser m = build_transeq_parser(config, *source, parser::relation_inventory(data.train), schedule);
      if (!aux.empty()) {
        // Rebuild with the auxiliary roster; the TranSeq weights are copied over.
        parser::ParserConfig pc = m.config();
        attach_aux(pc, aux);
        BiaffineParser g(pc, m.encoder().main.vocabs(), m.relations(), config.seed);
        for (const auto& [name, p] : m.store().parameters()) {
          auto& dst = g.store().at(name);
          std::copy(p.value.data().begin(), p.value.data().end(), dst.value.mutable_data().begin());
          dst.lr_scale = p.lr_scale;
          if (!p.trainable) g.store().set_trainable(name, false);
        }
        load_aux(g, aux, config);
        return g;
      }
      return m;
    } catch (const CheckpointError& e) {
      throw ConfigError(std::string("TranSeq: ") + e.what());
    }
  }();
  apply_word_vectors(model, spec, ctx);
  if (schedule == Schedule::kDl) details["pretrained_layer_lrs"] = pretrained_layer_lrs(model, config);
  details["schedule"] = schedule_name(schedule);
  RunResult r = finish_parser(spec.name(), std::move(model), corpus_of(data.train), corpus_of(data.dev),
                              corpus_of(data.test), config, ctx, 0.0, transeq_schedule(config, schedule));
  details.update(r.details);
  r.details = details;
  return r;
}

RunResult run_pipeline(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                       const RunContext& ctx) {
  config.validate();
  if (data.train.size() == 0) throw ConfigError("training set is empty");
  const bool needs_extra = spec.family == Family::kDcst || spec.variant == Variant::kLcm ||
                           spec.variant == Variant::kDcst || spec.variant == Variant::kDcstLcm;
  if (needs_extra) require_extra(data, variant_name(spec.variant));
  const json snapshot = {{"spec", to_json(spec)}, {"config", to_json(config)}};
  if (ctx.writes()) {
    fs::create_directories(ctx.run_dir);
    std::ofstream(ctx.path("log.txt"), std::ios::trunc);
    write_text(ctx, "config.json", snapshot.dump(2) + "\n");
  }
  ctx.log("variant " + variant_name(spec.variant) + ", family " + family_name(spec.family) + ", profile " +
          profile_name(config.profile) + ", seed " + std::to_string(config.seed));

  RunResult r;
  const bool dcst_family = spec.family == Family::kDcst;
  switch (spec.variant) {
    case Variant::kBase:
      r = dcst_family ? run_dcst(data, spec, config, ctx) : run_base(data, spec, config, ctx);
      break;
    case Variant::kBaseStar: r = run_base_star(data, spec, config, ctx); break;
    case Variant::kOracleMi: r = run_mi(data, spec, config, MiMode::kOracle, ctx); break;
    case Variant::kPredictedMi: r = run_mi(data, spec, config, MiMode::kPredicted, ctx); break;
    case Variant::kMtl: r = run_mtl(data, spec, config, ctx); break;
    case Variant::kTranSeqFe: r = run_transeq(data, spec, config, Schedule::kFe, ctx); break;
    case Variant::kTranSeqFea: r = run_transeq(data, spec, config, Schedule::kFea, ctx); break;
    case Variant::kTranSeqUf: r = run_transeq(data, spec, config, Schedule::kUf, ctx); break;
    case Variant::kTranSeqDl: r = run_transeq(data, spec, config, Schedule::kDl, ctx); break;
    case Variant::kTranSeqFt: r = run_transeq(data, spec, config, Schedule::kFt, ctx); break;
    case Variant::kLcm: {
      if (!dcst_family) {
        r = run_lcm(data, spec, config, ctx);
      } else {
        PipelineSpec s = spec;
        s.variant = Variant::kDcstLcm;
        if (s.run_name.empty()) s.run_name = "lcm";
        r = run_dcst(data, s, config, ctx);
      }
      break;
    }
    case Variant::kDcst:
    case Variant::kDcstLcm: r = run_dcst(data, spec, config, ctx); break;
  }
  r.name = spec.name();
  json metrics = eval::score_to_json(r.name, r.test, eval::config_digest(snapshot));
  metrics["dev"] = {{"uas", r.dev.uas}, {"las", r.dev.las}};
  metrics["details"] = r.details;
  eval::validate_metrics_json(metrics);
  write_text(ctx, "metrics.json", metrics.dump(2) + "\n");
  return r;
}

std::vector<eval::NamedScore> run_size_ablation(const PipelineData& data, const PipelineSpec& spec,
                                                const TrainConfig& config, const std::vector<std::size_t>& sizes,
                                                const RunContext& ctx) {
  for (std::size_t n : sizes) {
    if (n == 0 || n > data.train.size()) {
      throw ConfigError("training size " + std::to_string(n) + " outside 1.." + std::to_string(data.train.size()));
    }
  }
  std::vector<eval::NamedScore> rows;
  json table = json::array();
  for (std::size_t n : sizes) {
    PipelineData subset = data;
    subset.train.sentences.resize(n);
    RunContext sub = ctx;
    if (ctx.writes()) sub.run_dir = ctx.path("size-" + std::to_string(n));
    PipelineSpec s = spec;
    s.run_name = spec.name() + "@" + std::to_string(n);
    const RunResult r = run_pipeline(subset, s, config, sub);
    rows.push_back({s.run_name, r.test});
    table.push_back({{"size", n}, {"uas", r.test.uas}, {"las", r.test.las}});
  }
  write_text(ctx, "ablation.json", table.dump(2) + "\n");
  write_text(ctx, "ablation.txt", eval::report(rows));
  return rows;
}

}  // namespace lcm::pipelines
