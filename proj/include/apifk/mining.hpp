#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "apifk/dependency_graph.hpp"
#include "apifk/knowledge_store.hpp"
#include "apifk/log_model.hpp"
#include "apifk/param_sequences.hpp"

namespace apifk {

struct MiningOptions {
  std::size_t enum_threshold = kDefaultEnumThreshold;
  std::uint64_t required_support = kRequirednessSupport;
  std::size_t pattern_cap = kDefaultPatternCap;
  std::size_t chunk_size = 1024;  // values per map chunk
  std::size_t top_k = 10;         // producers kept per input parameter
  RankOptions rank;
  FilterConfig filter = FilterConfig::defaults();
};

// Throws InvalidConfig.
void validate(const MiningOptions& options);

// One document per API seen in the records or declared in the catalog.
// Value statistics (patterns, lengths, enums, ranges, examples) come from
// Right records only, so rejected inputs do not pollute the constraints;
// sequences and record counts cover every record.
std::map<std::string, ApiKnowledge> mine_knowledge(std::span<const ApiCallRecord> records,
                                                   const ApiCatalog& catalog,
                                                   const MiningOptions& options = {});

struct ConstraintCheck {
  std::string param;
  std::string kind;  // "required", "enum" or "range"
  bool ok = true;
  std::string detail;
};

// Checks a request against mined required flags, enum sets and numeric
// ranges. Only constraints that apply to the request are listed.
std::vector<ConstraintCheck> check_constraints(const ApiKnowledge& knowledge,
                                               const ParamList& params);

}  // namespace apifk
