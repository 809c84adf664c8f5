// lcm: command-line front end for tag derivation, tagger and parser
// training, parsing, evaluation and the experiment pipelines.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcm/autodiff/checkpoint.h"
#include "lcm/error.h"
#include "lcm/pipelines/gradcheck.h"
#include "lcm/pipelines/pipelines.h"
#include "lcm/synthetic.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lcm;
using namespace lcm::pipelines;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

TagScheme parse_scheme(const std::string& name) {
  const auto s = scheme_from_name(name);
  if (!s) throw ConfigError("--scheme: unknown scheme '" + name + "'");
  return *s;
}

// Options shared by every training command.
struct TrainFlags {
  std::string profile = "paper";
  std::string config_file;
  std::uint64_t seed = 1;
  std::size_t epochs = 0, tagger_epochs = 0, batch_size = 0;
  double lr = 0.0, dropout = 0.0;
  bool quiet = false;
  std::string run_dir;
  CLI::Option *profile_opt = nullptr, *seed_opt = nullptr, *epochs_opt = nullptr, *tagger_epochs_opt = nullptr,
              *batch_opt = nullptr, *lr_opt = nullptr, *dropout_opt = nullptr;

  void add(CLI::App* cmd) {
    profile_opt = cmd->add_option("--profile", profile, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
    cmd->add_option("--config", config_file, "JSON config; explicit flags take precedence")->check(CLI::ExistingFile);
    seed_opt = cmd->add_option("--seed", seed, "seed for all randomness");
    epochs_opt = cmd->add_option("--epochs", epochs, "parser epochs")->check(CLI::PositiveNumber);
    tagger_epochs_opt = cmd->add_option("--tagger-epochs", tagger_epochs, "tagger epochs")->check(CLI::PositiveNumber);
    batch_opt = cmd->add_option("--batch-size", batch_size)->check(CLI::PositiveNumber);
    lr_opt = cmd->add_option("--lr", lr)->check(CLI::PositiveNumber);
    dropout_opt = cmd->add_option("--dropout", dropout)->check(CLI::Range(0.0, 0.999));
    cmd->add_flag("--quiet", quiet, "suppress progress output");
  }

  json file() const { return config_file.empty() ? json::object() : read_json_file(config_file); }

  TrainConfig config() const {
    const json f = file();
    json c = f.contains("config") ? f["config"] : (f.contains("spec") ? json::object() : f);
    if (*profile_opt || !c.contains("profile")) c["profile"] = profile;
    TrainConfig t = train_config_from_json(c, TrainConfig::paper());
    if (*seed_opt) t.seed = seed;
    if (*epochs_opt) t.epochs = epochs;
    if (*tagger_epochs_opt) t.tagger_epochs = tagger_epochs;
    if (*batch_opt) t.batch_size = batch_size;
    if (*lr_opt) t.lr = lr;
    if (*dropout_opt) t.dropout = dropout;
    t.validate();
    return t;
  }

  RunContext context(const std::string& dir) const {
    RunContext ctx;
    ctx.run_dir = dir;
    ctx.quiet = quiet;
    ctx.sink = [](const std::string& line) { std::cerr << line << "\n"; };
    return ctx;
  }
};

std::string default_run_dir(const std::string& leaf) {
  const char* env = std::getenv("LCM_RUN_DIR");
  return (fs::path(env && *env ? env : "runs") / leaf).string();
}

// Flags of the pipeline-style commands.
struct PipelineFlags {
  std::string variant = "base", family = "biaff";
  std::string train, dev, test, extra, hier_checkpoint, tags_file, word_vectors, run_name, schemes, gate_variant,
      punct;
  bool freeze_pretrained = false, warm_start = false, disable_aux_gates = false;
  double mtl_lambda = 1.0;
  std::size_t unfreeze_interval = 20;
  CLI::Option *variant_opt = nullptr, *family_opt = nullptr, *lambda_opt = nullptr, *interval_opt = nullptr;

  void add(CLI::App* cmd) {
    variant_opt = cmd->add_option("--variant", variant, "experiment variant")->check(CLI::IsMember(variant_names()));
    family_opt = cmd->add_option("--family", family, "base parser family: biaff or dcst")
                     ->check(CLI::IsMember({"biaff", "dcst"}));
    cmd->add_option("--train", train, "labelled training CoNLL-U")->check(CLI::ExistingFile);
    cmd->add_option("--dev", dev, "development CoNLL-U")->check(CLI::ExistingFile);
    cmd->add_option("--test", test, "test CoNLL-U")->check(CLI::ExistingFile);
    cmd->add_option("--extra", extra, "extra (unlabelled or morphology-only) CoNLL-U")->check(CLI::ExistingFile);
    cmd->add_option("--schemes", schemes, "comma-separated gating schemes, e.g. MT,CT,LT");
    cmd->add_option("--hier-checkpoint", hier_checkpoint, "pretrained hierarchical tagger for TranSeq");
    cmd->add_option("--tags-file", tags_file, "externally predicted test tags (TSV) for predicted_mi")
        ->check(CLI::ExistingFile);
    cmd->add_option("--word-vectors", word_vectors, "pretrained word vectors (text)")->check(CLI::ExistingFile);
    cmd->add_option("--run-name", run_name);
    cmd->add_option("--gate-variant", gate_variant)->check(CLI::IsMember({"scalar-softmax", "elementwise-sigmoid"}));
    cmd->add_option("--punct", punct, "include or exclude PUNCT tokens")->check(CLI::IsMember({"include", "exclude"}));
    lambda_opt = cmd->add_option("--mtl-lambda", mtl_lambda)->check(CLI::NonNegativeNumber);
    interval_opt = cmd->add_option("--unfreeze-interval", unfreeze_interval)->check(CLI::PositiveNumber);
    cmd->add_flag("--freeze-pretrained", freeze_pretrained, "keep pretrained tagger encoders fixed");
    cmd->add_flag("--warm-start", warm_start, "self-training ensemble starts from the base encoder");
    cmd->add_flag("--disable-aux-gates", disable_aux_gates, "diagnostic: force auxiliary gate scores to -inf");
  }

  PipelineSpec spec(const json& file) const {
    PipelineSpec s = file.contains("spec") ? pipeline_spec_from_json(file["spec"]) : PipelineSpec{};
    if (*variant_opt || !file.contains("spec")) s.variant = variant_from_name(variant);
    if (*family_opt) s.family = family_from_name(family);
    for (auto [value, field] : {std::pair{&train, &s.train}, {&dev, &s.dev}, {&test, &s.test}, {&extra, &s.extra},
                                {&hier_checkpoint, &s.hier_checkpoint}, {&tags_file, &s.tags_file},
                                {&word_vectors, &s.word_vectors}, {&run_name, &s.run_name}}) {
      if (!value->empty()) *field = *value;
    }
    if (!schemes.empty()) {
      s.schemes.clear();
      std::stringstream ss(schemes);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto scheme = scheme_from_name(item);
        if (!scheme) throw ConfigError("--schemes: unknown scheme '" + item + "'");
        s.schemes.push_back(*scheme);
      }
    }
    return s;
  }

  void apply(TrainConfig& c) const {
    if (freeze_pretrained) c.freeze_pretrained = true;
    if (warm_start) c.warm_start = true;
    if (disable_aux_gates) c.disable_aux_gates = true;
    if (*lambda_opt) c.mtl_lambda = mtl_lambda;
    if (*interval_opt) c.unfreeze_interval = unfreeze_interval;
    if (!gate_variant.empty()) c.gate_variant = nn::gate_variant_from_name(gate_variant);
    if (!punct.empty()) c.punct = eval::punct_policy_from_name(punct);
    c.validate();
  }
};

int cmd_derive_tags(const std::string& scheme, const std::string& in, const std::string& out, int cap_depth,
                    int cap_children) {
  const TagScheme s = parse_scheme(scheme);
  const Treebank tb = read_conllu_file(in);
  TagOptions opts;
  opts.cap_depth = cap_depth;
  opts.cap_children = cap_children;
  write_file(out, write_tag_tsv(make_tagged_corpus(tb, s, opts)));
  return kExitOk;
}

void write_snapshot(const std::string& out, const json& snapshot) {
  write_file(out + ".config.json", snapshot.dump(2) + "\n");
}

int cmd_train_tagger(const TrainFlags& flags, const std::string& scheme, const std::string& train,
                     const std::string& dev, const std::string& out) {
  const TrainConfig config = flags.config();
  const TagScheme s = parse_scheme(scheme);
  const TaggedCorpus train_corpus = make_tagged_corpus(read_conllu_file(train), s);
  std::optional<TaggedCorpus> dev_corpus;
  if (!dev.empty()) dev_corpus = make_tagged_corpus(read_conllu_file(dev), s);
  write_snapshot(out, {{"command", "train-tagger"}, {"scheme", scheme}, {"train", train}, {"dev", dev},
                       {"config", to_json(config)}});
  const RunContext ctx = flags.context("");
  tagger::TrainOptions options = tagger_options(config, ctx);
  tagger::TrainHistory history;
  const auto model = tagger::train_tagger(train_corpus, dev_corpus ? &*dev_corpus : nullptr, tagger_config(config),
                                          options, &history, config.min_word_freq);
  model.save(out);
  if (dev_corpus) {
    const auto m = tagger::tag_metrics(tagger::predict_tags(model, dev_corpus->sentences), dev_corpus->tags);
    std::cout << "dev accuracy " << eval::format_score(100.0 * m.accuracy) << " macro-F1 "
              << eval::format_score(100.0 * m.macro_f1) << "\n";
  }
  return kExitOk;
}

int cmd_train_parser(const TrainFlags& flags, const std::string& train_path, const std::string& dev_path,
                     const std::string& out) {
  const TrainConfig config = flags.config();
  PipelineData data;
  data.train = read_conllu_file(train_path);
  if (!dev_path.empty()) data.dev = read_conllu_file(dev_path);
  write_snapshot(out, {{"command", "train-parser"}, {"train", train_path}, {"dev", dev_path},
                       {"config", to_json(config)}});
  parser::BiaffineParser model(parser_config(config), vocabs_of(data.train, config.min_word_freq),
                               parser::relation_inventory(data.train), config.seed);
  const RunContext ctx = flags.context("");
  const parser::ParserCorpus train{&data.train, {}, {}}, dev{&data.dev, {}, {}};
  const auto history = parser::train_parser(model, train, data.dev.size() ? &dev : nullptr, parser_options(config, ctx));
  model.save(out);
  if (data.dev.size()) std::cout << "best dev LAS " << eval::format_score(history.best_dev_las) << "\n";
  return kExitOk;
}

int cmd_parse(const std::string& model_path, const std::string& in, const std::string& out) {
  const parser::BiaffineParser model = parser::BiaffineParser::load(model_path);
  const Treebank tb = read_conllu_file(in);
  std::vector<parser::ParseTree> trees;
  for (const auto& s : tb.sentences) {
    std::vector<std::string> tags;
    if (model.uses_tags()) tags = derive_tags(s, TagScheme::MT).labels;
    trees.push_back(model.predict(s, model.uses_tags() ? &tags : nullptr));
  }
  const Treebank parsed = parser::apply_trees(tb, trees);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const TreeCheck check = validate_tree(parsed.sentences[i]);
    if (!check.ok()) throw ContractError("parser produced an invalid tree for sentence " + std::to_string(i + 1));
  }
  write_file(out, parsed.size() ? write_conllu(parsed) : "");
  return kExitOk;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path, const std::string& punct,
                 bool per_relation, const std::string& json_out, const std::string& name) {
  const Treebank gold = read_conllu_file(gold_path), pred = read_conllu_file(pred_path);
  if (gold.size() != pred.size()) {
    throw DataError("evaluate: " + gold_path + " has " + std::to_string(gold.size()) + " sentences, " + pred_path +
                    " has " + std::to_string(pred.size()));
  }
  std::vector<parser::ParseTree> trees;
  for (const auto& s : pred.sentences) trees.push_back({s.heads(), s.deprels()});
  const eval::AttachmentScore score = eval::uas_las(gold, trees, eval::punct_policy_from_name(punct));
  std::cout << eval::report({{name, score}}, per_relation);
  if (!json_out.empty()) {
    const json digest_input = {{"gold", gold_path}, {"pred", pred_path}, {"punct", punct}};
    write_file(json_out, eval::score_to_json(name, score, eval::config_digest(digest_input)).dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_pipeline(const TrainFlags& tflags, const PipelineFlags& pflags) {
  const json file = tflags.file();
  TrainConfig config = tflags.config();
  pflags.apply(config);
  const PipelineSpec spec = pflags.spec(file);
  const std::string dir = tflags.run_dir.empty() ? default_run_dir(spec.name() + "-seed" + std::to_string(config.seed))
                                                 : tflags.run_dir;
  const PipelineData data = load_pipeline_data(spec);
  const RunResult r = run_pipeline(data, spec, config, tflags.context(dir));
  std::cout << eval::report({{r.name, r.test}});
  std::cout << "metrics written to " << (fs::path(dir) / "metrics.json").string() << "\n";
  return kExitOk;
}

int cmd_size_ablation(const TrainFlags& tflags, const PipelineFlags& pflags, const std::vector<std::size_t>& sizes) {
  const json file = tflags.file();
  TrainConfig config = tflags.config();
  pflags.apply(config);
  const PipelineSpec spec = pflags.spec(file);
  const std::string dir = tflags.run_dir.empty() ? default_run_dir("ablation-" + spec.name()) : tflags.run_dir;
  const PipelineData data = load_pipeline_data(spec);
  RunContext ctx = tflags.context(dir);
  fs::create_directories(dir);
  write_file((fs::path(dir) / "config.json").string(),
             json{{"spec", to_json(spec)}, {"config", to_json(config)}, {"sizes", sizes}}.dump(2) + "\n");
  std::cout << eval::report(run_size_ablation(data, spec, config, sizes, ctx));
  return kExitOk;
}

int cmd_grad_check(const TrainFlags& flags, const std::string& model, std::size_t samples, double eps) {
  const TrainConfig config = flags.config();
  std::vector<std::string> components = {model};
  if (model == "all") components = grad_check_components();
  double worst = 0.0;
  for (const auto& c : components) {
    const ad::GradCheckResult r = grad_check_component(c, config, samples, eps, flags.seed);
    std::cout << c << ": max relative error " << r.max_rel_error << " over " << r.checked << " coordinates"
              << (r.worst.empty() ? "" : " (worst " + r.worst + ")") << "\n";
    worst = std::max(worst, r.max_rel_error);
  }
  if (!(worst < 1e-4)) {
    std::cerr << "gradient check failed: " << worst << " >= 1e-4\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_gen_synthetic(std::uint64_t seed, std::size_t n, const std::string& grammar, const std::string& out) {
  const SyntheticGrammar g = load_grammar(grammar.empty() ? default_grammar_path() : grammar);
  write_file(out, write_conllu(gen_synthetic(seed, n, g)));
  return kExitOk;
}

int cmd_inspect(const std::string& path) {
  const auto params = ad::read_checkpoint(path);
  std::size_t total = 0;
  std::cout << "format version " << ad::kCheckpointVersion << ", " << params.size() << " parameters\n";
  for (const auto& [name, t] : params) {
    std::cout << "  " << name << " " << ad::shape_string(t.shape()) << "\n";
    total += t.size();
  }
  std::cout << "total values " << total << "\n";
  if (fs::exists(path + ".json")) {
    const json side = read_json_file(path + ".json");
    std::cout << "kind " << side.value("kind", "?") << "\n";
    if (side.contains("roster")) std::cout << "roster " << side["roster"].dump() << "\n";
    if (side.contains("scheme")) std::cout << "scheme " << side["scheme"].get<std::string>() << "\n";
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Dependency parsing with auxiliary tagging pretraining"};
  app.require_subcommand(1);

  std::string scheme, in, out, train, dev, model, gold, pred, punct = "include", json_out, name = "run", grammar;
  int cap_depth = 7, cap_children = 7;
  bool per_relation = false;
  std::uint64_t seed = 1;
  std::size_t n = 100, samples = 20;
  double eps = 1e-5;
  std::vector<std::size_t> sizes;

  auto* derive = app.add_subcommand("derive-tags", "derive an auxiliary tag TSV from CoNLL-U");
  derive->add_option("--scheme", scheme)->required();
  derive->add_option("--in", in)->required()->check(CLI::ExistingFile);
  derive->add_option("--out", out)->required();
  derive->add_option("--cap-depth", cap_depth)->check(CLI::PositiveNumber);
  derive->add_option("--cap-children", cap_children)->check(CLI::PositiveNumber);

  TrainFlags tagger_flags, parser_flags, pipeline_flags, ablation_flags, grad_flags;
  auto* train_tagger = app.add_subcommand("train-tagger", "train one auxiliary-scheme tagger");
  train_tagger->add_option("--scheme", scheme)->required();
  train_tagger->add_option("--train", train)->required()->check(CLI::ExistingFile);
  train_tagger->add_option("--dev", dev)->check(CLI::ExistingFile);
  train_tagger->add_option("--out", out, "checkpoint path")->required();
  tagger_flags.add(train_tagger);

  auto* train_parser = app.add_subcommand("train-parser", "train a base biaffine parser");
  train_parser->add_option("--train", train)->required()->check(CLI::ExistingFile);
  train_parser->add_option("--dev", dev)->check(CLI::ExistingFile);
  train_parser->add_option("--out", out, "checkpoint path")->required();
  parser_flags.add(train_parser);

  auto* parse = app.add_subcommand("parse", "parse CoNLL-U with a trained parser");
  parse->add_option("--model", model)->required();
  parse->add_option("--in", in)->required()->check(CLI::ExistingFile);
  parse->add_option("--out", out)->required();

  auto* evaluate = app.add_subcommand("evaluate", "UAS/LAS of predicted against gold CoNLL-U");
  evaluate->add_option("--gold", gold)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--pred", pred)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--punct", punct)->check(CLI::IsMember({"include", "exclude"}));
  evaluate->add_flag("--per-relation", per_relation);
  evaluate->add_option("--json", json_out, "write scores as JSON");
  evaluate->add_option("--name", name);

  PipelineFlags pipeline_pflags, ablation_pflags;
  auto* pipeline = app.add_subcommand("pipeline", "run one experimental variant end to end");
  pipeline_flags.add(pipeline);
  pipeline_pflags.add(pipeline);
  pipeline->add_option("--run-dir", pipeline_flags.run_dir, "output directory (default $LCM_RUN_DIR/<name>)");

  auto* ablation = app.add_subcommand("size-ablation", "repeat a variant over training-set prefixes");
  ablation_flags.add(ablation);
  ablation_pflags.add(ablation);
  ablation->add_option("--run-dir", ablation_flags.run_dir);
  ablation->add_option("--sizes", sizes, "training sizes")->required()->delimiter(',');

  auto* grad = app.add_subcommand("grad-check", "compare gradients with finite differences");
  grad_flags.add(grad);
  grad->add_option("--model", model, "component or 'all'")->default_val("biaff");
  grad->add_option("--samples", samples)->check(CLI::NonNegativeNumber);
  grad->add_option("--eps", eps)->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic case-marked treebank");
  gen->add_option("--seed", seed);
  gen->add_option("--n", n, "sentences")->check(CLI::NonNegativeNumber);
  gen->add_option("--grammar", grammar)->check(CLI::ExistingFile);
  gen->add_option("--out", out)->required();

  auto* inspect = app.add_subcommand("inspect-checkpoint", "list the parameters of a checkpoint");
  inspect->add_option("--model", model)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*derive) return cmd_derive_tags(scheme, in, out, cap_depth, cap_children);
  if (*train_tagger) return cmd_train_tagger(tagger_flags, scheme, train, dev, out);
  if (*train_parser) return cmd_train_parser(parser_flags, train, dev, out);
  if (*parse) return cmd_parse(model, in, out);
  if (*evaluate) return cmd_evaluate(gold, pred, punct, per_relation, json_out, name);
  if (*pipeline) return cmd_pipeline(pipeline_flags, pipeline_pflags);
  if (*ablation) return cmd_size_ablation(ablation_flags, ablation_pflags, sizes);
  if (*grad) return cmd_grad_check(grad_flags, model, samples, eps);
  if (*gen) return cmd_gen_synthetic(seed, n, grammar, out);
  if (*inspect) return cmd_inspect(model);
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ContractError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
