#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apifk/log_model.hpp"

namespace apifk {

// API specs indexed by name, plus a reverse index from an output parameter
// name to the APIs that produce it.
class ApiCatalog {
 public:
  ApiCatalog() = default;
  // Throws InvalidConfig on duplicate API names or invalid specs.
  explicit ApiCatalog(std::vector<ApiSpec> specs);

  void add(ApiSpec spec);

  const ApiSpec* find(const std::string& api) const;
  const std::set<std::string>& producers_of(const std::string& param) const;
  const std::map<std::string, ApiSpec>& specs() const { return specs_; }
  bool empty() const { return specs_.empty(); }
  std::size_t size() const { return specs_.size(); }

 private:
  std::map<std::string, ApiSpec> specs_;
  std::map<std::string, std::set<std::string>> producers_;
};

nlohmann::json to_json(const ApiCatalog& catalog);
ApiCatalog catalog_from_json(const nlohmann::json& j);

struct RankWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double sigma = 1.0;
};

// Throws InvalidConfig unless all weights are strictly positive.
void validate(const RankWeights& weights);

// Session co-occurrence (Jaccard) relevance between APIs.
class RelevanceTable {
 public:
  RelevanceTable() = default;

  static RelevanceTable from_records(std::span<const ApiCallRecord> records);

  // 1 for the same API seen in at least one session; Jaccard otherwise;
  // 0 when neither API was seen.
  double relevance(const std::string& a, const std::string& b) const;
  bool has_data() const { return !sessions_per_api_.empty(); }

 private:
  std::map<std::string, std::size_t> sessions_per_api_;
  std::map<std::pair<std::string, std::string>, std::size_t> shared_;  // key: (min, max)
};

enum class SimilarityTarget {
  CandidateApiName,     // sim(p_i, c) against the candidate API name
  MatchingOutputParam,  // sim(p_i, c) against the candidate's matching output
};

struct RankOptions {
  RankWeights weights;
  SimilarityTarget param_target = SimilarityTarget::CandidateApiName;
};

struct DependencyEdge {
  std::string consumer_api;
  std::string input_param;
  std::string producer_api;
  double score = 0.0;

  bool operator==(const DependencyEdge&) const = default;
};

// APIs whose outputs contain `param` (exact, case-sensitive).
std::set<std::string> generate_candidates(const ApiCatalog& catalog, const std::string& param);

std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

// 1 - editDistance / max length; 1 when both are empty.
double string_similarity(std::string_view x, std::string_view y);

RelevanceTable session_relevance(std::span<const ApiCallRecord> records);

// Relevance used by the scorer: the table's value, or 1 when the table holds
// no session data at all.
double effective_relevance(const RelevanceTable& relevance, const std::string& a,
                           const std::string& b);

// (alpha*sim(a_i, c)) * (beta*sim(p_i, c)) * (sigma*rel(a_i, c)) / (c_in + c_out)
// Throws DegenerateCandidate if the candidate has no parameters, or
// InvalidConfig if c does not produce p_i.
double score(const std::string& consumer_api, const std::string& input_param,
             const std::string& candidate, const ApiCatalog& catalog,
             const RelevanceTable& relevance, const RankOptions& options = {});

// Top-k producers for (consumer_api, input_param), score desc then producer
// name asc. The consumer itself is never proposed as its own producer.
std::vector<DependencyEdge> rank(const std::string& consumer_api, const std::string& input_param,
                                 std::size_t k, const ApiCatalog& catalog,
                                 const RelevanceTable& relevance, const RankOptions& options = {});

// rank() for every input parameter of every API in the catalog.
std::map<std::string, std::vector<DependencyEdge>> rank_all(const ApiCatalog& catalog,
                                                            const RelevanceTable& relevance,
                                                            std::size_t k,
                                                            const RankOptions& options = {});

}  // namespace apifk
