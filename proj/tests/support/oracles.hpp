#pragma once

// Slow reference implementations used to cross-check the library. They
// share no code with src/ beyond the plain data types.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "apifk/log_model.hpp"

namespace oracle {

// Minimal UTF-8 decoder (well-formed input only).
std::u32string decode(const std::string& s);
std::string encode(const std::u32string& s);

// Class string by a per-character lookup.
std::string transform(const std::string& value);
std::string compress(const std::string& abstract);

// Enumerates every subsequence of the shorter string; only usable for short
// inputs (<= 16 code points). Returns the lexicographically smallest of
// the longest common subsequences.
std::u32string brute_lcs(const std::u32string& a, const std::u32string& b);
// Sorted left fold of brute_lcs.
std::string brute_common_subsequence(std::vector<std::string> values);

// Memoised recursive Levenshtein distance.
std::size_t edit_distance(const std::u32string& a, const std::u32string& b);
double similarity(const std::string& a, const std::string& b);

// |sessions with a and b| / |sessions with a or b| by explicit set building.
double jaccard(const std::vector<apifk::ApiCallRecord>& records, const std::string& a,
               const std::string& b);

// Temporal convolution straight from the 1-based definition
//   h_j(y) = b_j + sum_i sum_{x=1..k} f_ij(x) * g_i(y*d - x + c),  c = k - d + 1
// input is rows x cols row-major, weights [out][in][k].
std::vector<double> conv(const std::vector<double>& input, std::size_t rows, std::size_t cols,
                         const std::vector<double>& weights, const std::vector<double>& bias,
                         std::size_t out_rows, std::size_t k, std::size_t d);

// h(y) = max_{x=1..k} g(y*d - x + c), per row.
std::vector<double> maxpool(const std::vector<double>& input, std::size_t rows, std::size_t cols,
                            std::size_t k, std::size_t d);

// Random printable string mixing classes, with optional CJK characters.
std::string random_value(std::mt19937_64& rng, std::size_t max_len, bool cjk = true);

}  // namespace oracle
