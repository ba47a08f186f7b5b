#include "apifk/param_sequences.hpp"

#include <algorithm>
#include <cstdio>

namespace apifk {

FilterConfig FilterConfig::defaults() {
  FilterConfig c;
  c.exact = {"Signature", "AccessKeyId", "Timestamp", "SignatureNonce",
             "Format",    "Version",     "Action"};
  return c;
}

std::vector<std::string> extract_parameters(const ApiCallRecord& record) {
  std::vector<std::string> names;
  names.reserve(record.params.size());
  for (const auto& [k, v] : record.params) {
    names.push_back(k);
  }
  return names;
}

std::vector<std::string> filter_parameters(const std::vector<std::string>& names,
                                           const FilterConfig& config) {
  std::vector<std::string> kept;
  kept.reserve(names.size());
  for (const auto& n : names) {
    if (config.exact.contains(n)) continue;
    bool drop = false;
    for (const auto& prefix : config.prefixes) {
      if (!prefix.empty() && n.starts_with(prefix)) {
        drop = true;
        break;
      }
    }
    if (!drop) kept.push_back(n);
  }
  return kept;
}

SequenceKey make_key(std::string api, std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return SequenceKey{std::move(api), std::move(names)};
}

void SequenceCounter::add(const ApiCallRecord& record) {
  if (config_.successful_only && !record.outcome.is_right()) return;
  auto names = filter_parameters(extract_parameters(record), config_);
  ++counts_[make_key(record.api, std::move(names))];
}

void SequenceCounter::merge(const SequenceCounter& other) {
  for (const auto& [key, count] : other.counts_) {
    counts_[key] += count;
  }
}

SequenceStats SequenceCounter::finish() const {
  SequenceStats stats;
  for (const auto& [key, count] : counts_) {
    stats[key] = SequenceEntry{count, 0.0};
  }
  recompute_rates(stats);
  return stats;
}

void recompute_rates(SequenceStats& stats) {
  std::map<std::string, std::uint64_t> totals;
  for (const auto& [key, entry] : stats) totals[key.api] += entry.count;
  for (auto& [key, entry] : stats) {
    const auto total = totals[key.api];
    entry.rate = total == 0 ? 0.0 : static_cast<double>(entry.count) / static_cast<double>(total);
  }
}

SequenceStats mine_sequences(std::span<const ApiCallRecord> records, const FilterConfig& config) {
  SequenceCounter counter(config);
  for (const auto& r : records) counter.add(r);
  return counter.finish();
}

std::vector<SequenceRow> rows_for_api(const SequenceStats& stats, const std::string& api) {
  std::vector<SequenceRow> rows;
  // Keys sharing an api are contiguous in the ordered map.
  for (auto it = stats.lower_bound(SequenceKey{api, {}});
       it != stats.end() && it->first.api == api; ++it) {
    rows.push_back({it->first.params, it->second.count, it->second.rate});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  return rows;
}

std::string format_rate(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", rate);
  return buf;
}

}  // namespace apifk
