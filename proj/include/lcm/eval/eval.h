#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcm/conllu.h"
#include "lcm/parser/tree.h"

namespace lcm::eval {

enum class PunctPolicy { kInclude, kExclude };

std::string punct_policy_name(PunctPolicy p);
PunctPolicy punct_policy_from_name(const std::string& name);

struct RelationCounts {
  std::size_t total = 0;
  std::size_t head_correct = 0;
  std::size_t label_correct = 0;  // head and label
  bool operator==(const RelationCounts&) const = default;
};

struct AttachmentScore {
  double uas = 0.0;
  double las = 0.0;
  std::size_t total = 0;
  std::size_t head_correct = 0;
  std::size_t label_correct = 0;
  std::map<std::string, RelationCounts> per_relation;  // keyed by gold relation

  bool operator==(const AttachmentScore&) const = default;
};

AttachmentScore uas_las(const Treebank& gold, const std::vector<parser::ParseTree>& pred,
                        PunctPolicy policy = PunctPolicy::kInclude);

// Percentages rendered with two decimals, e.g. "70.67".
std::string format_score(double value);

struct NamedScore {
  std::string name;
  AttachmentScore score;
};

// Fixed-order text table; with per_relation, one breakdown block per entry.
// Throws ContractError if any entry has LAS above UAS.
std::string report(const std::vector<NamedScore>& results, bool per_relation = false);

nlohmann::json score_to_json(const std::string& run_name, const AttachmentScore& score,
                             const std::string& config_digest);
AttachmentScore score_from_json(const nlohmann::json& j);
// Throws DataError naming the first offending key.
void validate_metrics_json(const nlohmann::json& j);

// FNV-1a over the canonical dump of a JSON config, as 16 hex digits.
std::string config_digest(const nlohmann::json& config);

}  // namespace lcm::eval
