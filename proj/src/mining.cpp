#include "apifk/mining.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "apifk/enum_miner.hpp"
#include "apifk/errors.hpp"
#include "apifk/param_abstraction.hpp"

namespace apifk {

void validate(const MiningOptions& options) {
  if (options.enum_threshold < 2) throw InvalidConfig("enum threshold must be at least 2");
  if (options.chunk_size == 0) throw InvalidConfig("chunk_size must be positive");
  if (options.top_k == 0) throw InvalidConfig("top_k must be positive");
  if (options.pattern_cap == 0) throw InvalidConfig("pattern_cap must be positive");
  validate(options.rank.weights);
}

namespace {

ParamKnowledge mine_param(const std::string& api, const std::string& name,
                          const std::vector<std::string>& values, const MiningOptions& options) {
  ParamKnowledge p;
  p.name = name;
  p.enum_state = mine_enum({api, name}, values, options.enum_threshold);
  p.numeric_range = mine_numeric_range(values);
  if (values.empty()) return p;

  std::vector<PartialAbstraction> partials;
  for (std::size_t i = 0; i < values.size(); i += options.chunk_size) {
    const auto n = std::min(options.chunk_size, values.size() - i);
    partials.push_back(map_chunk(std::span<const std::string>(values).subspan(i, n)));
  }
  p.profile = reduce(partials, options.pattern_cap);
  p.subsequence_partials = {p.profile.common_subsequence};
  p.examples = representative_examples(values, p.profile, kExampleLimit);
  return p;
}

}  // namespace

std::map<std::string, ApiKnowledge> mine_knowledge(std::span<const ApiCallRecord> records,
                                                   const ApiCatalog& catalog,
                                                   const MiningOptions& options) {
  validate(options);
  std::map<std::string, std::vector<const ApiCallRecord*>> by_api;
  for (const auto& [name, spec] : catalog.specs()) by_api[name];
  for (const auto& r : records) by_api[r.api].push_back(&r);

  const auto sequences = mine_sequences(records, options.filter);
  const auto relevance = RelevanceTable::from_records(records);

  std::map<std::string, ApiKnowledge> docs;
  for (const auto& [api, recs] : by_api) {
    ApiKnowledge k;
    k.api = api;
    k.record_count = recs.size();

    std::vector<ApiCallRecord> own;
    own.reserve(recs.size());
    std::map<std::string, std::vector<std::string>> values;  // Right records only
    std::set<std::string> seen;
    for (const auto* r : recs) {
      k.generated_at = std::max(k.generated_at, r->timestamp);
      own.push_back(*r);
      for (const auto& [name, value] : r->params) {
        seen.insert(name);
        if (r->outcome.is_right()) values[name].push_back(value);
      }
      if (r->outcome.is_right()) ++k.success_count;
    }
    const auto required = mine_requiredness(own, options.required_support);

    const auto* spec = catalog.find(api);
    if (spec) {
      for (const auto& ps : spec->input_params) seen.insert(ps.name);
    }
    for (const auto& name : seen) {
      auto it = values.find(name);
      auto p = mine_param(api, name, it == values.end() ? std::vector<std::string>{} : it->second,
                          options);
      p.unspecified_param = !spec || !spec->has_input(name);
      if (spec) {
        for (const auto& ps : spec->input_params) {
          if (ps.name == name) p.declared_type = ps.declared_type;
        }
      }
      if (auto r = required.find(name); r != required.end()) {
        p.required = r->second;
      } else {
        p.required.total_success_count = k.success_count;
        infer_required(p.required, options.required_support);
      }
      k.params.emplace(name, std::move(p));
    }

    k.sequences = rows_for_api(sequences, api);
    for (const auto& [name, p] : k.params) {
      auto edges = rank(api, name, options.top_k, catalog, relevance, options.rank);
      k.dependencies.insert(k.dependencies.end(), edges.begin(), edges.end());
    }
    sort_edges(k.dependencies);
    docs.emplace(api, std::move(k));
  }
  return docs;
}

namespace {

std::string join(const std::set<std::string>& values) {
  std::ostringstream out;
  bool first = true;
  for (const auto& v : values) {
    if (!first) out << ", ";
    out << v;
    first = false;
  }
  return out.str();
}

std::string number(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

std::vector<ConstraintCheck> check_constraints(const ApiKnowledge& knowledge,
                                               const ParamList& params) {
  const auto lookup = [&](const std::string& name) -> const std::string* {
    for (const auto& [k, v] : params) {
      if (k == name) return &v;
    }
    return nullptr;
  };
  std::vector<ConstraintCheck> out;
  for (const auto& [name, p] : knowledge.params) {
    const auto* value = lookup(name);
    if (p.required.inferred_required) {
      out.push_back({name, "required", value != nullptr,
                     value ? "present" : "required parameter is missing"});
    }
    if (!value) continue;
    if (p.enum_state.enumerable() && !p.enum_state.values.empty()) {
      const bool ok = p.enum_state.values.contains(*value);
      out.push_back({name, "enum", ok,
                     ok ? "value is a mined enum member"
                        : "value not in {" + join(p.enum_state.values) + "}"});
    }
    const bool numeric_param =
        p.declared_type == ParamType::Integer || p.declared_type == ParamType::Decimal ||
        p.declared_type == ParamType::Unknown;
    if (numeric_param && p.numeric_range.reported()) {
      const auto parsed = parse_decimal(*value);
      const bool ok =
          parsed && *parsed >= p.numeric_range.min && *parsed <= p.numeric_range.max;
      out.push_back({name, "range", ok,
                     ok ? "within mined range"
                        : "value outside [" + number(p.numeric_range.min) + ", " +
                              number(p.numeric_range.max) + "]"});
    }
  }
  return out;
}

}  // namespace apifk
