#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcm/eval/eval.h"
#include "lcm/parser/train.h"
#include "lcm/pipelines/config.h"
#include "lcm/tagger/tagger.h"

namespace lcm::pipelines {

struct PipelineData {
  Treebank train, dev, test, extra;
};

// Reads the CoNLL-U files named in the spec; dev and extra may be empty.
PipelineData load_pipeline_data(const PipelineSpec& spec);

// Where a run writes its artifacts. An empty run_dir keeps everything in
// memory.
//   <run_dir>/config.json            spec + training config snapshot
//   <run_dir>/metrics.json           final test scores
//   <run_dir>/checkpoints/<name>     parameters, with <name>.json sidecars
//   <run_dir>/tags/<scheme>.tsv      derived tagger training data
//   <run_dir>/log.txt                progress log
struct RunContext {
  std::string run_dir;
  bool quiet = false;
  std::function<void(const std::string&)> sink;  // progress lines, e.g. stderr

  void log(const std::string& line) const;
  std::string path(const std::string& relative) const;
  bool writes() const { return !run_dir.empty(); }
};

struct RunResult {
  std::string name;
  eval::AttachmentScore test;
  eval::AttachmentScore dev;
  std::optional<parser::BiaffineParser> model;
  nlohmann::json details = nlohmann::json::object();
};

RunResult run_base(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                   const RunContext& ctx);
RunResult run_lcm(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                  const RunContext& ctx);
RunResult run_dcst(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                   const RunContext& ctx);
RunResult run_mtl(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                  const RunContext& ctx);

enum class MiMode { kOracle, kPredicted };
RunResult run_mi(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config, MiMode mode,
                 const RunContext& ctx);

enum class Schedule { kFe, kFea, kUf, kDl, kFt };
std::string schedule_name(Schedule s);
RunResult run_transeq(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                      Schedule schedule, const RunContext& ctx);

// Base parser with one more BiLSTM layer, sized like the TranSeq parser.
RunResult run_base_star(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                        const RunContext& ctx);

// Dispatches on spec.variant and writes config.json / metrics.json.
RunResult run_pipeline(const PipelineData& data, const PipelineSpec& spec, const TrainConfig& config,
                       const RunContext& ctx);

// One run per training-set size on the prefix of the training data.
std::vector<eval::NamedScore> run_size_ablation(const PipelineData& data, const PipelineSpec& spec,
                                                const TrainConfig& config, const std::vector<std::size_t>& sizes,
                                                const RunContext& ctx);

// ---- building blocks, exposed for tests and the command line ----

parser::ParserConfig parser_config(const TrainConfig& config);
tagger::TaggerConfig tagger_config(const TrainConfig& config);
parser::ParserTrainOptions parser_options(const TrainConfig& config, const RunContext& ctx);
tagger::TrainOptions tagger_options(const TrainConfig& config, const RunContext& ctx);
nn::EncoderVocabs vocabs_of(const Treebank& treebank, std::size_t min_word_freq);

// Pretrained auxiliary encoder ready to join a gate.
struct AuxTagger {
  std::string name;
  tagger::TaggerModel model;
};

// Builds a gated parser whose main encoder starts from the same initial
// values as a plain parser with the same seed, then copies each tagger's
// encoder in.
parser::BiaffineParser build_gated_parser(const TrainConfig& config, const nn::EncoderVocabs& vocabs,
                                          const std::vector<std::string>& relations,
                                          const std::vector<AuxTagger>& aux);

// Parameters that make up the TranSeq parser for a given schedule, with
// freezing, adapters and learning-rate scales applied.
parser::BiaffineParser build_transeq_parser(const TrainConfig& config, const tagger::HierMorphTagger& source,
                                            const std::vector<std::string>& relations, Schedule schedule);
// Trainable-state changes applied before each epoch.
std::function<void(std::size_t, parser::BiaffineParser&)> transeq_schedule(const TrainConfig& config,
                                                                           Schedule schedule);
// Effective learning rates of the three pretrained layers, top first.
std::vector<double> pretrained_layer_lrs(const parser::BiaffineParser& model, const TrainConfig& config);
// Element count of every parameter except vocabulary-sized embedding tables.
std::size_t architecture_parameter_count(const ad::ParameterStore& store);

// Parses every sentence and checks each output tree; returns the parsed copy.
Treebank auto_parse(const parser::BiaffineParser& model, const Treebank& treebank, std::size_t* invalid = nullptr);

}  // namespace lcm::pipelines
