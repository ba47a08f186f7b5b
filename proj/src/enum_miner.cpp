#include "apifk/enum_miner.hpp"

#include <algorithm>
#include <charconv>

#include "apifk/errors.hpp"

namespace apifk {

void EnumState::add(std::string_view value) {
  if (status == EnumStatus::NotEnumerable) return;
  values.emplace(value);
  if (values.size() >= threshold) {
    status = EnumStatus::NotEnumerable;
    values.clear();
  }
}

std::string to_string(EnumStatus status) {
  return status == EnumStatus::Enumerable ? "Enumerable" : "NotEnumerable";
}

EnumState mine_enum(ParamKey key, std::span<const std::string> values, std::size_t threshold) {
  if (threshold < 2) {
    throw InvalidConfig("enum threshold must be at least 2");
  }
  EnumState state;
  state.key = std::move(key);
  state.threshold = threshold;
  for (const auto& v : values) {
    state.add(v);
    if (!state.enumerable()) break;
  }
  return state;
}

EnumState merge_enum(EnumState state, const std::set<std::string>& batch_values) {
  for (const auto& v : batch_values) {
    state.add(v);
    if (!state.enumerable()) break;
  }
  return state;
}

EnumState merge_enum(EnumState state, const EnumState& batch) {
  if (state.key != batch.key) {
    throw KeyMismatch("cannot merge enum states of " + state.key.api + "." + state.key.param +
                      " and " + batch.key.api + "." + batch.key.param);
  }
  if (state.threshold != batch.threshold) {
    throw KeyMismatch("cannot merge enum states with different thresholds");
  }
  if (!batch.enumerable()) {
    state.status = EnumStatus::NotEnumerable;
    state.values.clear();
    return state;
  }
  return merge_enum(std::move(state), batch.values);
}

std::optional<double> parse_decimal(std::string_view text) {
  std::size_t pos = 0;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
  std::size_t int_digits = 0;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    ++pos;
    ++int_digits;
  }
  std::size_t frac_digits = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      ++pos;
      ++frac_digits;
    }
  }
  if (pos != text.size() || int_digits + frac_digits == 0) {
    return std::nullopt;
  }
  // from_chars rejects a leading '+'.
  std::string_view body = text;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value,
                                   std::chars_format::fixed);
  if (ec != std::errc() || ptr != body.data() + body.size()) {
    return std::nullopt;
  }
  return value;
}

bool NumericRange::reported() const {
  if (sample_count == 0) return false;
  const double total = static_cast<double>(sample_count + non_numeric_count);
  return static_cast<double>(non_numeric_count) / total <= kNumericTolerance;
}

void NumericRange::add(std::string_view value) {
  auto parsed = parse_decimal(value);
  if (!parsed) {
    ++non_numeric_count;
    return;
  }
  if (sample_count == 0) {
    min = max = *parsed;
  } else {
    min = std::min(min, *parsed);
    max = std::max(max, *parsed);
  }
  ++sample_count;
}

void NumericRange::merge(const NumericRange& other) {
  if (other.sample_count > 0) {
    if (sample_count == 0) {
      min = other.min;
      max = other.max;
    } else {
      min = std::min(min, other.min);
      max = std::max(max, other.max);
    }
  }
  sample_count += other.sample_count;
  non_numeric_count += other.non_numeric_count;
}

NumericRange mine_numeric_range(std::span<const std::string> values) {
  NumericRange range;
  for (const auto& v : values) range.add(v);
  return range;
}

void infer_required(RequirednessStat& stat, std::uint64_t support) {
  stat.inferred_required = stat.total_success_count >= support &&
                           stat.present_count == stat.total_success_count;
}

std::map<std::string, RequirednessStat> mine_requiredness(std::span<const ApiCallRecord> records,
                                                          std::uint64_t support) {
  std::map<std::string, RequirednessStat> stats;
  std::uint64_t successes = 0;
  for (const auto& r : records) {
    const bool ok = r.outcome.is_right();
    if (ok) ++successes;
    for (const auto& [name, value] : r.params) {
      auto& s = stats[name];
      if (ok) ++s.present_count;
    }
  }
  for (auto& [name, s] : stats) {
    s.total_success_count = successes;
    infer_required(s, support);
  }
  return stats;
}

}  // namespace apifk
