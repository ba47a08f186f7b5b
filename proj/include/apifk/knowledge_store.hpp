#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "apifk/dependency_graph.hpp"
#include "apifk/enum_miner.hpp"
#include "apifk/param_abstraction.hpp"
#include "apifk/param_sequences.hpp"

namespace apifk {

inline constexpr int kKnowledgeSchemaVersion = 1;
inline constexpr std::size_t kExampleLimit = 3;

struct ParamKnowledge {
  std::string name;
  bool unspecified_param = false;  // not an input of the catalog spec
  ParamType declared_type = ParamType::Unknown;
  AbstractionProfile profile;
  // Per-batch subsequences; profile.common_subsequence is recomputed from
  // these on merge since LCS has no exact combiner.
  std::vector<std::string> subsequence_partials;
  EnumState enum_state;
  NumericRange numeric_range;
  RequirednessStat required;
  std::vector<std::string> examples;

  bool operator==(const ParamKnowledge&) const = default;
};

struct ApiKnowledge {
  int schema_version = kKnowledgeSchemaVersion;
  std::string api;
  std::int64_t generated_at = 0;  // largest log timestamp covered
  std::uint64_t record_count = 0;
  std::uint64_t success_count = 0;  // Right outcomes among record_count
  std::map<std::string, ParamKnowledge> params;
  std::vector<SequenceRow> sequences;      // rate desc
  std::vector<DependencyEdge> dependencies;  // grouped by input param, score desc

  const ParamKnowledge* param(const std::string& name) const;
  bool operator==(const ApiKnowledge&) const = default;
};

nlohmann::ordered_json to_json(const ApiKnowledge& knowledge);
// Throws SchemaVersionMismatch or MalformedDocument.
ApiKnowledge knowledge_from_json(const nlohmann::json& j);

// Two-space indented JSON with a trailing newline.
std::string dump_knowledge(const ApiKnowledge& knowledge);

// Letters, digits, '.', '-' and '_' kept; everything else becomes '_'.
std::string knowledge_filename(const std::string& api);

// Atomic (temp file + rename). Throws IoError.
void save(const ApiKnowledge& knowledge, const std::string& path);
// Throws IoError, SchemaVersionMismatch, MalformedDocument.
ApiKnowledge load(const std::string& path);

// One document per API under `dir` (created if missing). Returns the paths
// written.
std::vector<std::string> save_all(const std::map<std::string, ApiKnowledge>& docs,
                                  const std::string& dir);
// Every *.json document in `dir`, keyed by api.
std::map<std::string, ApiKnowledge> load_all(const std::string& dir);

// Folds a new batch into existing knowledge for the same API. Counts,
// histograms and patterns are summed, enum states merged, ranges widened,
// the common subsequence recomputed from the concatenated partials and
// dependency edges re-sorted with the batch's scores taking precedence.
// Throws ApiMismatch.
ApiKnowledge merge_daily(const ApiKnowledge& existing, const ApiKnowledge& batch);

// Sorts edges by input param, then score desc, then producer asc.
void sort_edges(std::vector<DependencyEdge>& edges);

}  // namespace apifk
