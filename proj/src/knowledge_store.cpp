#include "apifk/knowledge_store.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "apifk/errors.hpp"

namespace apifk {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const ParamKnowledge* ApiKnowledge::param(const std::string& name) const {
  auto it = params.find(name);
  return it == params.end() ? nullptr : &it->second;
}

namespace {

ojson param_to_json(const ParamKnowledge& p) {
  ojson patterns = ojson::array();
  for (const auto& ap : p.profile.patterns) {
    patterns.push_back({{"pattern", ap.pattern}, {"count", ap.count}});
  }
  ojson lengths = ojson::array();
  for (const auto& [len, count] : p.profile.lengths) {
    lengths.push_back({{"length", len}, {"count", count}});
  }
  const std::vector<std::string> values(p.enum_state.values.begin(), p.enum_state.values.end());
  ojson range = {{"sample_count", p.numeric_range.sample_count},
                 {"non_numeric_count", p.numeric_range.non_numeric_count},
                 {"min", p.numeric_range.min},
                 {"max", p.numeric_range.max},
                 {"reported", p.numeric_range.reported()}};
  return {
      {"name", p.name},
      {"unspecified_param", p.unspecified_param},
      {"declared_type", to_string(p.declared_type)},
      {"values_seen", p.profile.values_seen},
      {"truncated", p.profile.truncated},
      {"common_subsequence", p.profile.common_subsequence},
      {"subsequence_partials", p.subsequence_partials},
      {"patterns", std::move(patterns)},
      {"spill", p.profile.spilled},
      {"lengths", std::move(lengths)},
      {"enum",
       {{"status", to_string(p.enum_state.status)},
        {"threshold", p.enum_state.threshold},
        {"values", values}}},
      {"enum_values", p.enum_state.enumerable() ? values : std::vector<std::string>{}},
      {"numeric_range", std::move(range)},
      {"required",
       {{"present_count", p.required.present_count},
        {"total_success_count", p.required.total_success_count},
        {"inferred_required", p.required.inferred_required}}},
      {"examples", p.examples},
  };
}

ParamKnowledge param_from_json(const std::string& api, const nlohmann::json& j) {
  ParamKnowledge p;
  p.name = j.at("name").get<std::string>();
  if (p.name.empty()) throw MalformedDocument("parameter with empty name");
  p.unspecified_param = j.at("unspecified_param").get<bool>();
  p.declared_type = param_type_from_string(j.at("declared_type").get<std::string>());
  p.profile.values_seen = j.at("values_seen").get<std::uint64_t>();
  p.profile.truncated = j.value("truncated", std::uint64_t{0});
  p.profile.common_subsequence = j.at("common_subsequence").get<std::string>();
  p.subsequence_partials = j.at("subsequence_partials").get<std::vector<std::string>>();
  for (const auto& pj : j.at("patterns")) {
    p.profile.patterns.push_back(
        {pj.at("pattern").get<std::string>(), pj.at("count").get<std::uint64_t>()});
  }
  p.profile.spilled = j.at("spill").get<std::uint64_t>();
  for (const auto& lj : j.at("lengths")) {
    p.profile.lengths[lj.at("length").get<std::size_t>()] = lj.at("count").get<std::uint64_t>();
  }
  const auto& ej = j.at("enum");
  p.enum_state.key = {api, p.name};
  p.enum_state.threshold = ej.at("threshold").get<std::size_t>();
  const auto status = ej.at("status").get<std::string>();
  if (status == "Enumerable") {
    p.enum_state.status = EnumStatus::Enumerable;
  } else if (status == "NotEnumerable") {
    p.enum_state.status = EnumStatus::NotEnumerable;
  } else {
    throw MalformedDocument("unknown enum status " + status);
  }
  for (const auto& v : ej.at("values")) p.enum_state.values.insert(v.get<std::string>());
  const auto& rj = j.at("numeric_range");
  p.numeric_range.sample_count = rj.at("sample_count").get<std::uint64_t>();
  p.numeric_range.non_numeric_count = rj.at("non_numeric_count").get<std::uint64_t>();
  p.numeric_range.min = rj.at("min").get<double>();
  p.numeric_range.max = rj.at("max").get<double>();
  const auto& qj = j.at("required");
  p.required.present_count = qj.at("present_count").get<std::uint64_t>();
  p.required.total_success_count = qj.at("total_success_count").get<std::uint64_t>();
  p.required.inferred_required = qj.at("inferred_required").get<bool>();
  p.examples = j.at("examples").get<std::vector<std::string>>();
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write error on " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

std::vector<SequenceRow> merge_rows(const std::vector<SequenceRow>& a,
                                    const std::vector<SequenceRow>& b) {
  std::map<std::vector<std::string>, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto* rows : {&a, &b}) {
    for (const auto& r : *rows) {
      counts[r.params] += r.count;
      total += r.count;
    }
  }
  std::vector<SequenceRow> out;
  for (const auto& [params, count] : counts) {
    out.push_back({params, count,
                   total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& x, const auto& y) { return x.count > y.count; });
  return out;
}

ParamKnowledge merge_param(const ParamKnowledge& a, const ParamKnowledge& b) {
  ParamKnowledge m;
  m.name = a.name;
  m.unspecified_param = a.unspecified_param && b.unspecified_param;
  m.declared_type = b.declared_type != ParamType::Unknown ? b.declared_type : a.declared_type;

  PatternCounts patterns;
  for (const auto* p : {&a, &b}) {
    for (const auto& ap : p->profile.patterns) patterns[ap.pattern] += ap.count;
    for (const auto& [len, count] : p->profile.lengths) m.profile.lengths[len] += count;
  }
  m.profile.values_seen = a.profile.values_seen + b.profile.values_seen;
  m.profile.truncated = a.profile.truncated + b.profile.truncated;
  m.profile.patterns = rank_patterns(patterns, kDefaultPatternCap, &m.profile.spilled);
  m.profile.spilled += a.profile.spilled + b.profile.spilled;

  m.subsequence_partials = a.subsequence_partials;
  m.subsequence_partials.insert(m.subsequence_partials.end(), b.subsequence_partials.begin(),
                                b.subsequence_partials.end());
  if (!m.subsequence_partials.empty()) {
    m.profile.common_subsequence = common_subsequence(m.subsequence_partials);
  }

  m.enum_state = merge_enum(a.enum_state, b.enum_state);
  m.numeric_range = a.numeric_range;
  m.numeric_range.merge(b.numeric_range);
  m.required.present_count = a.required.present_count + b.required.present_count;
  m.required.total_success_count =
      a.required.total_success_count + b.required.total_success_count;
  infer_required(m.required);

  // Examples must keep matching the (possibly new) top pattern.
  if (const auto* top = m.profile.top_pattern()) {
    for (const auto* p : {&b, &a}) {
      for (const auto& ex : p->examples) {
        if (m.examples.size() >= kExampleLimit) break;
        if (abstract_pattern(ex) == top->pattern &&
            std::find(m.examples.begin(), m.examples.end(), ex) == m.examples.end()) {
          m.examples.push_back(ex);
        }
      }
    }
  }
  return m;
}

}  // namespace

void sort_edges(std::vector<DependencyEdge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const auto& x, const auto& y) {
    if (x.input_param != y.input_param) return x.input_param < y.input_param;
    if (x.score != y.score) return x.score > y.score;
    return x.producer_api < y.producer_api;
  });
}

nlohmann::ordered_json to_json(const ApiKnowledge& k) {
  ojson params = ojson::array();
  for (const auto& [name, p] : k.params) params.push_back(param_to_json(p));
  ojson sequences = ojson::array();
  for (const auto& r : k.sequences) {
    sequences.push_back({{"params", r.params}, {"count", r.count}, {"rate", r.rate}});
  }
  ojson deps = ojson::array();
  for (const auto& e : k.dependencies) {
    deps.push_back(
        {{"input_param", e.input_param}, {"producer_api", e.producer_api}, {"score", e.score}});
  }
  return {{"schema_version", k.schema_version},
          {"api", k.api},
          {"generated_at", k.generated_at},
          {"record_count", k.record_count},
          {"success_count", k.success_count},
          {"params", std::move(params)},
          {"sequences", std::move(sequences)},
          {"dependencies", std::move(deps)}};
}

ApiKnowledge knowledge_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw MalformedDocument("knowledge document is not an object");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw MalformedDocument("missing schema_version");
  }
  const int version = j["schema_version"].get<int>();
  if (version != kKnowledgeSchemaVersion) {
    throw SchemaVersionMismatch("knowledge schema_version " + std::to_string(version) +
                                " not supported (expected " +
                                std::to_string(kKnowledgeSchemaVersion) + ")");
  }
  try {
    ApiKnowledge k;
    k.schema_version = version;
    k.api = j.at("api").get<std::string>();
    if (k.api.empty()) throw MalformedDocument("empty api name");
    k.generated_at = j.at("generated_at").get<std::int64_t>();
    k.record_count = j.at("record_count").get<std::uint64_t>();
    k.success_count = j.at("success_count").get<std::uint64_t>();
    if (k.success_count > k.record_count) throw MalformedDocument("success_count > record_count");
    for (const auto& pj : j.at("params")) {
      auto p = param_from_json(k.api, pj);
      const auto name = p.name;
      if (!k.params.emplace(name, std::move(p)).second) {
        throw MalformedDocument("duplicate parameter " + name);
      }
    }
    for (const auto& sj : j.at("sequences")) {
      k.sequences.push_back({sj.at("params").get<std::vector<std::string>>(),
                             sj.at("count").get<std::uint64_t>(), sj.at("rate").get<double>()});
    }
    for (const auto& dj : j.at("dependencies")) {
      k.dependencies.push_back({k.api, dj.at("input_param").get<std::string>(),
                                dj.at("producer_api").get<std::string>(),
                                dj.at("score").get<double>()});
    }
    return k;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedDocument(std::string("knowledge document: ") + e.what());
  }
}

std::string dump_knowledge(const ApiKnowledge& knowledge) {
  return to_json(knowledge).dump(2) + "\n";
}

std::string knowledge_filename(const std::string& api) {
  std::string out;
  for (unsigned char c : api) {
    const bool keep = std::isalnum(c) || c == '.' || c == '-' || c == '_';
    out.push_back(keep ? static_cast<char>(c) : '_');
  }
  return out + ".json";
}

void save(const ApiKnowledge& knowledge, const std::string& path) {
  write_atomic(path, dump_knowledge(knowledge));
}

ApiKnowledge load(const std::string& path) {
  const auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedDocument(path + ": " + e.what());
  }
  return knowledge_from_json(j);
}

std::vector<std::string> save_all(const std::map<std::string, ApiKnowledge>& docs,
                                  const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  std::vector<std::string> paths;
  for (const auto& [api, doc] : docs) {
    const auto path = (fs::path(dir) / knowledge_filename(api)).string();
    save(doc, path);
    paths.push_back(path);
  }
  return paths;
}

std::map<std::string, ApiKnowledge> load_all(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, ApiKnowledge> docs;
  for (const auto& f : files) {
    auto doc = load(f.string());
    const auto api = doc.api;
    docs.insert_or_assign(api, std::move(doc));
  }
  return docs;
}

ApiKnowledge merge_daily(const ApiKnowledge& existing, const ApiKnowledge& batch) {
  if (existing.api != batch.api) {
    throw ApiMismatch("cannot merge knowledge of " + existing.api + " with " + batch.api);
  }
  ApiKnowledge m;
  m.api = existing.api;
  m.generated_at = std::max(existing.generated_at, batch.generated_at);
  m.record_count = existing.record_count + batch.record_count;
  m.success_count = existing.success_count + batch.success_count;

  std::set<std::string> names;
  for (const auto* doc : {&existing, &batch}) {
    for (const auto& [name, p] : doc->params) names.insert(name);
  }
  for (const auto& name : names) {
    const auto* a = existing.param(name);
    const auto* b = batch.param(name);
    // A side that never saw the parameter still contributes its successes
    // to the requiredness denominator.
    const auto blank = [&](const ParamKnowledge& other, const ApiKnowledge& side) {
      ParamKnowledge p;
      p.name = name;
      p.unspecified_param = other.unspecified_param;
      p.declared_type = other.declared_type;
      p.enum_state.key = other.enum_state.key;
      p.enum_state.threshold = other.enum_state.threshold;
      p.required.total_success_count = side.success_count;
      return p;
    };
    m.params.emplace(name, merge_param(a ? *a : blank(*b, existing), b ? *b : blank(*a, batch)));
  }
  m.sequences = merge_rows(existing.sequences, batch.sequences);

  std::map<std::pair<std::string, std::string>, DependencyEdge> edges;
  for (const auto& e : existing.dependencies) edges[{e.input_param, e.producer_api}] = e;
  for (const auto& e : batch.dependencies) edges[{e.input_param, e.producer_api}] = e;
  for (auto& [key, e] : edges) m.dependencies.push_back(e);
  sort_edges(m.dependencies);
  return m;
}

}  // namespace apifk
