#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "apifk/log_model.hpp"

namespace apifk {

inline constexpr std::size_t kDefaultEnumThreshold = 20;
inline constexpr double kNumericTolerance = 0.01;
inline constexpr std::uint64_t kRequirednessSupport = 30;

struct ParamKey {
  std::string api;
  std::string param;

  auto operator<=>(const ParamKey&) const = default;
  bool operator==(const ParamKey&) const = default;
};

enum class EnumStatus { Enumerable, NotEnumerable };

// Distinct-value tracker with a strict cardinality bound: a parameter stays
// Enumerable while it has fewer than `threshold` distinct values. Once the
// bound is reached the state is NotEnumerable for good and the value set is
// dropped.
struct EnumState {
  ParamKey key;
  std::size_t threshold = kDefaultEnumThreshold;
  EnumStatus status = EnumStatus::Enumerable;
  std::set<std::string> values;

  bool enumerable() const { return status == EnumStatus::Enumerable; }
  void add(std::string_view value);

  bool operator==(const EnumState&) const = default;
};

std::string to_string(EnumStatus status);

// Throws InvalidConfig when threshold < 2.
EnumState mine_enum(ParamKey key, std::span<const std::string> values,
                    std::size_t threshold = kDefaultEnumThreshold);

EnumState merge_enum(EnumState state, const std::set<std::string>& batch_values);

// Throws KeyMismatch if key or threshold differ.
EnumState merge_enum(EnumState state, const EnumState& batch);

struct NumericRange {
  double min = 0.0;
  double max = 0.0;
  std::uint64_t sample_count = 0;
  std::uint64_t non_numeric_count = 0;

  // True iff there is at least one sample and the non-numeric share is at
  // most kNumericTolerance.
  bool reported() const;
  void add(std::string_view value);
  void merge(const NumericRange& other);

  bool operator==(const NumericRange&) const = default;
};

// Optional sign, digits, optional fraction; no exponent, no whitespace.
std::optional<double> parse_decimal(std::string_view text);

NumericRange mine_numeric_range(std::span<const std::string> values);

struct RequirednessStat {
  std::uint64_t present_count = 0;
  std::uint64_t total_success_count = 0;
  bool inferred_required = false;

  bool operator==(const RequirednessStat&) const = default;
};

// Recomputes inferred_required from the counts.
void infer_required(RequirednessStat& stat, std::uint64_t support = kRequirednessSupport);

// Records are expected to belong to one API. Every parameter seen in any of
// them gets a stat; only Right outcomes are counted.
std::map<std::string, RequirednessStat> mine_requiredness(
    std::span<const ApiCallRecord> records, std::uint64_t support = kRequirednessSupport);

}  // namespace apifk
