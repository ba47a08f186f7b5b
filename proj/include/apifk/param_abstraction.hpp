#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apifk {

// Character-class abstraction of raw parameter values, and a map/reduce pair
// that turns an arbitrarily partitioned value set into one profile
// (common subsequence, compressed-pattern frequencies, length histogram).
//
// Lengths and subsequences are measured in code points, not bytes.

inline constexpr std::size_t kLcsMaxChars = 4096;
inline constexpr std::size_t kDefaultPatternCap = 256;

using LengthHistogram = std::map<std::size_t, std::uint64_t>;
using PatternCounts = std::map<std::string, std::uint64_t>;

struct AbstractPattern {
  std::string pattern;
  std::uint64_t count = 0;

  bool operator==(const AbstractPattern&) const = default;
};

struct PartialAbstraction {
  std::string subsequence;
  PatternCounts patterns;
  LengthHistogram lengths;
  std::uint64_t values_seen = 0;
  std::uint64_t truncated = 0;  // values cut to kLcsMaxChars before LCS

  bool operator==(const PartialAbstraction&) const = default;
};

struct AbstractionProfile {
  std::string common_subsequence;
  std::vector<AbstractPattern> patterns;  // count desc, then pattern asc
  LengthHistogram lengths;
  std::uint64_t values_seen = 0;
  std::uint64_t truncated = 0;
  // Values whose pattern fell outside the retained top patterns.
  std::uint64_t spilled = 0;

  const AbstractPattern* top_pattern() const {
    return patterns.empty() ? nullptr : &patterns.front();
  }

  bool operator==(const AbstractionProfile&) const = default;
};

// CJK ideograph -> 'z', a-z -> 'x', A-Z -> 'X', 0-9 -> 'd', anything else
// kept verbatim.
std::string transform(std::string_view value);

// Collapses maximal runs of one character to a single occurrence.
std::string compress(std::string_view abstract);

inline std::string abstract_pattern(std::string_view value) { return compress(transform(value)); }

// Lexicographically smallest among the longest common subsequences of a, b.
std::u32string pairwise_lcs(std::u32string_view a, std::u32string_view b);

// Sorts the values, then left-folds pairwise_lcs. Each value is truncated to
// kLcsMaxChars first; `truncated` (if given) receives how many were cut.
// Throws EmptyInput for an empty list.
std::string common_subsequence(std::span<const std::string> values,
                               std::uint64_t* truncated = nullptr);

LengthHistogram length_histogram(std::span<const std::string> values);

PartialAbstraction map_chunk(std::span<const std::string> values);

// Throws EmptyInput for an empty list.
AbstractionProfile reduce(std::span<const PartialAbstraction> partials,
                          std::size_t pattern_cap = kDefaultPatternCap);

// Orders a pattern multiset by count desc, pattern asc and applies the cap.
std::vector<AbstractPattern> rank_patterns(const PatternCounts& counts, std::size_t cap,
                                           std::uint64_t* spilled);

// Picks up to `limit` distinct example values whose compressed pattern equals
// the profile's top pattern. Most frequent first, ties lexicographic.
std::vector<std::string> representative_examples(std::span<const std::string> values,
                                                 const AbstractionProfile& profile,
                                                 std::size_t limit = 3);

bool is_subsequence(std::string_view needle, std::string_view haystack);

}  // namespace apifk
