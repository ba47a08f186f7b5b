#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "apifk/log_model.hpp"

namespace apifk {

struct SequenceKey {
  std::string api;
  std::vector<std::string> params;  // strictly ascending

  auto operator<=>(const SequenceKey&) const = default;
  bool operator==(const SequenceKey&) const = default;
};

struct SequenceEntry {
  std::uint64_t count = 0;
  double rate = 0.0;

  bool operator==(const SequenceEntry&) const = default;
};

using SequenceStats = std::map<SequenceKey, SequenceEntry>;

struct FilterConfig {
  std::set<std::string> exact;
  std::vector<std::string> prefixes;
  bool successful_only = false;

  // Common gateway/system parameters.
  static FilterConfig defaults();
};

std::vector<std::string> extract_parameters(const ApiCallRecord& record);

std::vector<std::string> filter_parameters(const std::vector<std::string>& names,
                                           const FilterConfig& config);

// Sorts and deduplicates.
SequenceKey make_key(std::string api, std::vector<std::string> names);

// Mapper-side accumulator; merge() is the reducer. Counts only.
class SequenceCounter {
 public:
  explicit SequenceCounter(FilterConfig config = FilterConfig::defaults())
      : config_(std::move(config)) {}

  void add(const ApiCallRecord& record);
  void merge(const SequenceCounter& other);
  SequenceStats finish() const;

  const std::map<SequenceKey, std::uint64_t>& counts() const { return counts_; }

 private:
  FilterConfig config_;
  std::map<SequenceKey, std::uint64_t> counts_;
};

SequenceStats mine_sequences(std::span<const ApiCallRecord> records,
                             const FilterConfig& config = FilterConfig::defaults());

// Recomputes rates from counts (per API).
void recompute_rates(SequenceStats& stats);

struct SequenceRow {
  std::vector<std::string> params;
  std::uint64_t count = 0;
  double rate = 0.0;
  bool operator==(const SequenceRow&) const = default;
};

// Rows of one API sorted by rate desc, ties by key.
std::vector<SequenceRow> rows_for_api(const SequenceStats& stats, const std::string& api);

// Four decimal places.
std::string format_rate(double rate);

}  // namespace apifk
