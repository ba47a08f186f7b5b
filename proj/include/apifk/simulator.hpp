#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "apifk/dependency_graph.hpp"
#include "apifk/log_model.hpp"

namespace apifk::sim {

// Value generators -------------------------------------------------------

struct DigitsGen {
  std::size_t length = 1;  // total length including the prefix
  std::string prefix;
};

struct EnumGen {
  std::vector<std::string> values;
};

struct PrefixedIdGen {
  std::string prefix;
  std::size_t digits = 1;
  std::string suffix;
};

enum class Charset { Lower, Upper, Mixed, Cjk };

struct FreeTextGen {
  std::size_t min_length = 1;
  std::size_t max_length = 8;
  Charset charset = Charset::Lower;
};

struct IntegerGen {
  std::int64_t min = 0;
  std::int64_t max = 0;
};

// 'd' digit, 'x' lowercase, 'X' uppercase, 'z' CJK ideograph; any other
// character is copied.
struct ShapeGen {
  std::string shape;
};

using ValueGenerator =
    std::variant<DigitsGen, EnumGen, PrefixedIdGen, FreeTextGen, IntegerGen, ShapeGen>;

std::string generate_value(const ValueGenerator& gen, std::mt19937_64& rng);

// Error rules ------------------------------------------------------------

struct MissingPred {
  std::string param;
};

// Present and not one of `values` (or absent, when or_missing).
struct NotInPred {
  std::string param;
  std::vector<std::string> values;
  bool or_missing = false;
};

// transform(value) differs from `shape`.
struct NotShapePred {
  std::string param;
  std::string shape;
  bool or_missing = false;
};

// Non-numeric or outside [min, max].
struct OutOfRangePred {
  std::string param;
  double min = 0.0;
  double max = 0.0;
  bool or_missing = false;
};

using Predicate = std::variant<MissingPred, NotInPred, NotShapePred, OutOfRangePred>;

bool matches(const Predicate& pred, const ParamList& params);

struct ErrorRule {
  std::string api;
  Predicate when;
  std::string code;
};

// Scenario ---------------------------------------------------------------

struct SequenceMixEntry {
  std::vector<std::string> params;  // log order of the emitted request
  double probability = 0.0;
};

struct Corruption {
  enum class Kind { Drop, Replace };
  std::string param;
  Kind kind = Kind::Drop;
  std::optional<ValueGenerator> replacement;
};

struct ApiScenario {
  ApiSpec spec;
  double weight = 1.0;  // share of generated records
  std::map<std::string, ValueGenerator> generators;
  std::vector<SequenceMixEntry> sequence_mix;
  double corruption_rate = 0.0;
  std::vector<Corruption> corruptions;
};

struct SimScenario {
  std::vector<ApiScenario> apis;
  std::vector<ErrorRule> rules;
  std::uint64_t seed = 7;
  std::size_t session_length = 4;
  std::int64_t start_ts = 1'600'000'000'000;
  std::int64_t ts_step = 1'000;

  ApiCatalog catalog() const;
  const ApiScenario* find(const std::string& api) const;
};

// Throws InvalidConfig: mix probabilities must sum to 1 per API, every mixed
// parameter needs a generator, weights must be positive.
void validate(const SimScenario& scenario);

// Outcome of the first matching rule for the api, else Right.
OutcomeLabel evaluate(const SimScenario& scenario, const std::string& api,
                      const ParamList& params);

// Largest-remainder apportionment of n over the probabilities.
std::vector<std::size_t> exact_quotas(std::size_t n, const std::vector<double>& probabilities);

// Deterministic in (scenario, n). API shares and sequence mixes are
// apportioned exactly; corruption draws use per-record seeded streams.
std::vector<ApiCallRecord> generate(const SimScenario& scenario, std::size_t n);

// SendSms / AddSmsSign with five error rules.
SimScenario default_scenario(std::uint64_t seed = 7);

// SendSms only, 0.7 / 0.3 mix with and without OutId, no corruption.
SimScenario sequence_mix_scenario(std::uint64_t seed = 7);

nlohmann::json to_json(const SimScenario& scenario);
SimScenario scenario_from_json(const nlohmann::json& j);
SimScenario load_scenario(const std::string& path);

}  // namespace apifk::sim
