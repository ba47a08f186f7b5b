#include "apifk/param_abstraction.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "apifk/errors.hpp"
#include "apifk/utf8.hpp"

namespace apifk {

namespace {

char32_t char_class(char32_t cp) {
  if (cp >= 0x4E00 && cp <= 0x9FFF) return U'z';
  if (cp >= U'a' && cp <= U'z') return U'x';
  if (cp >= U'A' && cp <= U'Z') return U'X';
  if (cp >= U'0' && cp <= U'9') return U'd';
  return cp;
}

std::u32string truncated_codepoints(std::string_view value, std::uint64_t& truncated) {
  auto cps = utf8::decode(value);
  if (cps.size() > kLcsMaxChars) {
    cps.resize(kLcsMaxChars);
    ++truncated;
  }
  return cps;
}

}  // namespace

std::string transform(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char32_t cp : utf8::decode(value)) {
    utf8::append(out, char_class(cp));
  }
  return out;
}

std::string compress(std::string_view abstract) {
  std::string out;
  out.reserve(abstract.size());
  bool first = true;
  char32_t prev = 0;
  for (char32_t cp : utf8::decode(abstract)) {
    if (first || cp != prev) {
      utf8::append(out, cp);
    }
    prev = cp;
    first = false;
  }
  return out;
}

std::u32string pairwise_lcs(std::u32string_view a, std::u32string_view b) {
  if (a.empty() || b.empty()) return {};
  if (a == b) return std::u32string(a);

  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (std::min(n, m) > UINT16_MAX) {
    throw InvalidConfig("pairwise_lcs input longer than 65535 characters");
  }
  const std::size_t stride = m + 1;
  // suffix[i * stride + j] = |LCS(a[i:], b[j:])|
  std::vector<std::uint16_t> suffix((n + 1) * stride, 0);
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      if (a[i] == b[j]) {
        suffix[i * stride + j] = static_cast<std::uint16_t>(suffix[(i + 1) * stride + j + 1] + 1);
      } else {
        suffix[i * stride + j] = std::max(suffix[(i + 1) * stride + j], suffix[i * stride + j + 1]);
      }
    }
  }

  // Greedy lexicographic reconstruction: at each step take the smallest
  // character whose earliest joint occurrence still leaves an optimal tail.
  std::u32string out;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t remaining = suffix[0];
  out.reserve(remaining);
  std::map<char32_t, std::size_t> first_a;
  std::unordered_map<char32_t, std::size_t> first_b;
  while (remaining > 0) {
    first_a.clear();
    first_b.clear();
    for (std::size_t p = i; p < n; ++p) first_a.emplace(a[p], p);
    for (std::size_t q = j; q < m; ++q) first_b.emplace(b[q], q);
    bool advanced = false;
    for (const auto& [ch, pa] : first_a) {
      auto it = first_b.find(ch);
      if (it == first_b.end()) continue;
      if (suffix[pa * stride + it->second] == remaining) {
        out.push_back(ch);
        i = pa + 1;
        j = it->second + 1;
        --remaining;
        advanced = true;
        break;
      }
    }
    if (!advanced) break;  // unreachable for a consistent table
  }
  return out;
}

std::string common_subsequence(std::span<const std::string> values, std::uint64_t* truncated) {
  if (values.empty()) {
    throw EmptyInput("common_subsequence of an empty value list");
  }
  std::vector<std::string_view> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  std::uint64_t cut = 0;
  std::u32string acc = truncated_codepoints(sorted.front(), cut);
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    const auto next = truncated_codepoints(sorted[k], cut);
    if (!acc.empty()) {
      acc = pairwise_lcs(acc, next);
    }
  }
  if (truncated) *truncated += cut;
  return utf8::encode(acc);
}

LengthHistogram length_histogram(std::span<const std::string> values) {
  LengthHistogram h;
  for (const auto& v : values) {
    ++h[utf8::length(v)];
  }
  return h;
}

PartialAbstraction map_chunk(std::span<const std::string> values) {
  if (values.empty()) {
    throw EmptyInput("map_chunk on an empty chunk");
  }
  PartialAbstraction p;
  p.subsequence = common_subsequence(values, &p.truncated);
  for (const auto& v : values) {
    ++p.patterns[abstract_pattern(v)];
  }
  p.lengths = length_histogram(values);
  p.values_seen = values.size();
  return p;
}

std::vector<AbstractPattern> rank_patterns(const PatternCounts& counts, std::size_t cap,
                                           std::uint64_t* spilled) {
  std::vector<AbstractPattern> ranked;
  ranked.reserve(counts.size());
  for (const auto& [pattern, count] : counts) {
    ranked.push_back({pattern, count});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    return x.count > y.count;  // map order already gives pattern asc
  });
  if (ranked.size() > cap) {
    std::uint64_t spill = 0;
    for (std::size_t k = cap; k < ranked.size(); ++k) spill += ranked[k].count;
    ranked.resize(cap);
    if (spilled) *spilled += spill;
  }
  return ranked;
}

AbstractionProfile reduce(std::span<const PartialAbstraction> partials, std::size_t pattern_cap) {
  if (partials.empty()) {
    throw EmptyInput("reduce over no partials");
  }
  PatternCounts patterns;
  AbstractionProfile profile;
  std::vector<std::string> subsequences;
  subsequences.reserve(partials.size());
  for (const auto& p : partials) {
    for (const auto& [pattern, count] : p.patterns) patterns[pattern] += count;
    for (const auto& [len, count] : p.lengths) profile.lengths[len] += count;
    profile.values_seen += p.values_seen;
    profile.truncated += p.truncated;
    subsequences.push_back(p.subsequence);
  }
  profile.common_subsequence = common_subsequence(subsequences);
  profile.patterns = rank_patterns(patterns, pattern_cap, &profile.spilled);
  return profile;
}

std::vector<std::string> representative_examples(std::span<const std::string> values,
                                                 const AbstractionProfile& profile,
                                                 std::size_t limit) {
  const auto* top = profile.top_pattern();
  if (!top || limit == 0) return {};
  std::map<std::string_view, std::uint64_t> counts;
  for (const auto& v : values) {
    if (abstract_pattern(v) == top->pattern) ++counts[v];
  }
  std::vector<std::pair<std::string_view, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<std::string> out;
  for (std::size_t k = 0; k < ranked.size() && k < limit; ++k) {
    out.emplace_back(ranked[k].first);
  }
  return out;
}

bool is_subsequence(std::string_view needle, std::string_view haystack) {
  const auto n = utf8::decode(needle);
  const auto h = utf8::decode(haystack);
  std::size_t i = 0;
  for (std::size_t j = 0; j < h.size() && i < n.size(); ++j) {
    if (n[i] == h[j]) ++i;
  }
  return i == n.size();
}

}  // namespace apifk
