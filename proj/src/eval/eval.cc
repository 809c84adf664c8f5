#include "lcm/eval/eval.h"

#include <cstdio>
#include <sstream>

#include "lcm/error.h"
#include "lcm/rng.h"

namespace lcm::eval {

std::string punct_policy_name(PunctPolicy p) { return p == PunctPolicy::kInclude ? "include" : "exclude"; }

PunctPolicy punct_policy_from_name(const std::string& name) {
  if (name == "include") return PunctPolicy::kInclude;
  if (name == "exclude") return PunctPolicy::kExclude;
  throw ConfigError("unknown punct policy '" + name + "' (expected include or exclude)");
}

namespace {

double percent(std::size_t correct, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

void check_ordering(const std::string& name, const AttachmentScore& s) {
  if (s.las > s.uas || s.label_correct > s.head_correct) {
    throw ContractError("LAS above UAS for '" + name + "'");
  }
}

}  // namespace

AttachmentScore uas_las(const Treebank& gold, const std::vector<parser::ParseTree>& pred, PunctPolicy policy) {
  if (gold.size() != pred.size()) {
    throw ContractError("uas_las: " + std::to_string(gold.size()) + " gold sentences but " +
                        std::to_string(pred.size()) + " predictions");
  }
  AttachmentScore s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Sentence& g = gold.sentences[i];
    const parser::ParseTree& p = pred[i];
    if (p.heads.size() != g.size() || p.labels.size() != g.size()) {
      throw ContractError("uas_las: token count mismatch in sentence " + std::to_string(i));
    }
    for (std::size_t t = 0; t < g.size(); ++t) {
      const Token& tok = g.tokens[t];
      if (policy == PunctPolicy::kExclude && tok.upos == "PUNCT") continue;
      RelationCounts& rel = s.per_relation[tok.deprel];
      ++s.total;
      ++rel.total;
      if (p.heads[t] == tok.head) {
        ++s.head_correct;
        ++rel.head_correct;
        if (p.labels[t] == tok.deprel) {
          ++s.label_correct;
          ++rel.label_correct;
        }
      }
    }
  }
  s.uas = percent(s.head_correct, s.total);
  s.las = percent(s.label_correct, s.total);
  return s;
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string report(const std::vector<NamedScore>& results, bool per_relation) {
  std::size_t width = 3;
  for (const auto& r : results) width = std::max(width, r.name.size());
  std::ostringstream out;
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  out << pad("run") << "  UAS / LAS\n";
  for (const auto& r : results) {
    check_ordering(r.name, r.score);
    out << pad(r.name) << "  " << format_score(r.score.uas) << " / " << format_score(r.score.las) << "\n";
  }
  if (per_relation) {
    for (const auto& r : results) {
      out << "\n" << r.name << " per relation (tokens, UAS, LAS)\n";
      for (const auto& [rel, c] : r.score.per_relation) {
        out << "  " << rel << "\t" << c.total << "\t" << format_score(percent(c.head_correct, c.total)) << "\t"
            << format_score(percent(c.label_correct, c.total)) << "\n";
      }
    }
  }
  return out.str();
}

nlohmann::json score_to_json(const std::string& run_name, const AttachmentScore& score,
                             const std::string& config_digest) {
  check_ordering(run_name, score);
  nlohmann::json rel = nlohmann::json::object();
  for (const auto& [name, c] : score.per_relation) {
    rel[name] = {{"total", c.total}, {"head_correct", c.head_correct}, {"label_correct", c.label_correct}};
  }
  return {{"run_name", run_name},
          {"uas", score.uas},
          {"las", score.las},
          {"counts",
           {{"total", score.total},
            {"head_correct", score.head_correct},
            {"label_correct", score.label_correct},
            {"per_relation", rel}}},
          {"config_digest", config_digest}};
}

AttachmentScore score_from_json(const nlohmann::json& j) {
  validate_metrics_json(j);
  AttachmentScore s;
  s.uas = j.at("uas").get<double>();
  s.las = j.at("las").get<double>();
  const auto& c = j.at("counts");
  s.total = c.at("total").get<std::size_t>();
  s.head_correct = c.at("head_correct").get<std::size_t>();
  s.label_correct = c.at("label_correct").get<std::size_t>();
  if (c.contains("per_relation")) {
    for (const auto& [name, r] : c.at("per_relation").items()) {
      s.per_relation[name] = {r.at("total").get<std::size_t>(), r.at("head_correct").get<std::size_t>(),
                              r.at("label_correct").get<std::size_t>()};
    }
  }
  return s;
}

void validate_metrics_json(const nlohmann::json& j) {
  auto fail = [](const std::string& what) { throw DataError("metrics JSON: " + what); };
  if (!j.is_object()) fail("top level is not an object");
  if (!j.contains("run_name") || !j["run_name"].is_string()) fail("'run_name' missing or not a string");
  if (!j.contains("config_digest") || !j["config_digest"].is_string()) fail("'config_digest' missing or not a string");
  for (const char* key : {"uas", "las"}) {
    if (!j.contains(key) || !j[key].is_number()) fail(std::string("'") + key + "' missing or not a number");
    const double v = j[key].get<double>();
    if (v < 0.0 || v > 100.0) fail(std::string("'") + key + "' outside [0, 100]");
  }
  if (j["las"].get<double>() > j["uas"].get<double>()) fail("'las' exceeds 'uas'");
  if (!j.contains("counts") || !j["counts"].is_object()) fail("'counts' missing or not an object");
  const auto& c = j["counts"];
  for (const char* key : {"total", "head_correct", "label_correct"}) {
    if (!c.contains(key) || !c[key].is_number_unsigned()) {
      fail(std::string("'counts.") + key + "' missing or not a non-negative integer");
    }
  }
  const auto total = c["total"].get<std::size_t>(), head = c["head_correct"].get<std::size_t>(),
             label = c["label_correct"].get<std::size_t>();
  if (!(label <= head && head <= total)) fail("counts violate label_correct <= head_correct <= total");
}

std::string config_digest(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

}  // namespace lcm::eval
