#include "apifk/dependency_graph.hpp"

#include <algorithm>
#include <numeric>

#include "apifk/errors.hpp"
#include "apifk/utf8.hpp"

namespace apifk {

ApiCatalog::ApiCatalog(std::vector<ApiSpec> specs) {
  for (auto& s : specs) add(std::move(s));
}

void ApiCatalog::add(ApiSpec spec) {
  validate(spec);
  if (specs_.contains(spec.name)) {
    throw InvalidConfig("duplicate api " + spec.name);
  }
  for (const auto& p : spec.output_params) {
    producers_[p.name].insert(spec.name);
  }
  auto name = spec.name;
  specs_.emplace(std::move(name), std::move(spec));
}

const ApiSpec* ApiCatalog::find(const std::string& api) const {
  auto it = specs_.find(api);
  return it == specs_.end() ? nullptr : &it->second;
}

const std::set<std::string>& ApiCatalog::producers_of(const std::string& param) const {
  static const std::set<std::string> kNone;
  auto it = producers_.find(param);
  return it == producers_.end() ? kNone : it->second;
}

nlohmann::json to_json(const ApiCatalog& catalog) {
  auto arr = nlohmann::json::array();
  for (const auto& [name, spec] : catalog.specs()) arr.push_back(to_json(spec));
  return arr;
}

ApiCatalog catalog_from_json(const nlohmann::json& j) {
  const auto& arr = j.is_object() && j.contains("apis") ? j["apis"] : j;
  if (!arr.is_array()) {
    throw InvalidConfig("catalog must be an array of api specs");
  }
  ApiCatalog catalog;
  for (const auto& spec : arr) catalog.add(api_spec_from_json(spec));
  return catalog;
}

void validate(const RankWeights& w) {
  if (!(w.alpha > 0.0) || !(w.beta > 0.0) || !(w.sigma > 0.0)) {
    throw InvalidConfig("rank weights must be strictly positive");
  }
}

RelevanceTable RelevanceTable::from_records(std::span<const ApiCallRecord> records) {
  std::map<std::string, std::set<std::string>> apis_per_session;
  for (const auto& r : records) {
    apis_per_session[r.session_id].insert(r.api);
  }
  RelevanceTable table;
  for (const auto& [session, apis] : apis_per_session) {
    for (auto a = apis.begin(); a != apis.end(); ++a) {
      ++table.sessions_per_api_[*a];
      for (auto b = std::next(a); b != apis.end(); ++b) {
        ++table.shared_[{*a, *b}];  // set order gives a < b
      }
    }
  }
  return table;
}

double RelevanceTable::relevance(const std::string& a, const std::string& b) const {
  auto count = [&](const std::string& api) -> std::size_t {
    auto it = sessions_per_api_.find(api);
    return it == sessions_per_api_.end() ? 0 : it->second;
  };
  if (a == b) return count(a) > 0 ? 1.0 : 0.0;
  const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  auto it = shared_.find(key);
  const std::size_t both = it == shared_.end() ? 0 : it->second;
  const std::size_t either = count(a) + count(b) - both;
  if (either == 0) return 0.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

std::set<std::string> generate_candidates(const ApiCatalog& catalog, const std::string& param) {
  return catalog.producers_of(param);
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

double string_similarity(std::string_view x, std::string_view y) {
  const auto a = utf8::decode(x);
  const auto b = utf8::decode(y);
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

RelevanceTable session_relevance(std::span<const ApiCallRecord> records) {
  return RelevanceTable::from_records(records);
}

double effective_relevance(const RelevanceTable& relevance, const std::string& a,
                           const std::string& b) {
  return relevance.has_data() ? relevance.relevance(a, b) : 1.0;
}

double score(const std::string& consumer_api, const std::string& input_param,
             const std::string& candidate, const ApiCatalog& catalog,
             const RelevanceTable& relevance, const RankOptions& options) {
  validate(options.weights);
  const auto* spec = catalog.find(candidate);
  if (!spec || !spec->has_output(input_param)) {
    throw InvalidConfig(candidate + " does not produce " + input_param);
  }
  const auto size = spec->input_params.size() + spec->output_params.size();
  if (size == 0) {
    throw DegenerateCandidate(candidate + " has no parameters");
  }
  const auto& w = options.weights;
  // With exact candidate matching the output-param target is the parameter
  // name itself; the mode stays for catalogs that alias names.
  const std::string& param_target =
      options.param_target == SimilarityTarget::CandidateApiName ? candidate : input_param;
  const double api_term = w.alpha * string_similarity(consumer_api, candidate);
  const double param_term = w.beta * string_similarity(input_param, param_target);
  const double rel_term = w.sigma * effective_relevance(relevance, consumer_api, candidate);
  return api_term * param_term * rel_term / static_cast<double>(size);
}

std::vector<DependencyEdge> rank(const std::string& consumer_api, const std::string& input_param,
                                 std::size_t k, const ApiCatalog& catalog,
                                 const RelevanceTable& relevance, const RankOptions& options) {
  if (k == 0) {
    throw InvalidConfig("rank: k must be at least 1");
  }
  std::vector<DependencyEdge> edges;
  for (const auto& c : generate_candidates(catalog, input_param)) {
    if (c == consumer_api) continue;
    edges.push_back({consumer_api, input_param, c,
                     score(consumer_api, input_param, c, catalog, relevance, options)});
  }
  // Candidates arrive in name order, so a stable sort keeps name-asc ties.
  std::stable_sort(edges.begin(), edges.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  if (edges.size() > k) edges.resize(k);
  return edges;
}

std::map<std::string, std::vector<DependencyEdge>> rank_all(const ApiCatalog& catalog,
                                                            const RelevanceTable& relevance,
                                                            std::size_t k,
                                                            const RankOptions& options) {
  std::map<std::string, std::vector<DependencyEdge>> out;
  for (const auto& [name, spec] : catalog.specs()) {
    auto& edges = out[name];
    for (const auto& p : spec.input_params) {
      auto ranked = rank(name, p.name, k, catalog, relevance, options);
      edges.insert(edges.end(), ranked.begin(), ranked.end());
    }
  }
  return out;
}

}  // namespace apifk
