#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "apifk/log_model.hpp"
#include "apifk/predictor/alphabet.hpp"

namespace apifk::predictor {

inline constexpr std::size_t kDefaultInputLength = 1014;

// m x l0 one-hot matrix stored sparsely: columns[j] is the alphabet index
// of the 1 in column j, or -1 for an all-zero column.
struct QuantizedInput {
  std::size_t alphabet_size = 0;
  std::vector<std::int32_t> columns;

  std::size_t length() const noexcept { return columns.size(); }
  // Row-major m x l0.
  std::vector<double> dense() const;
  std::size_t nonzero_columns() const;

  bool operator==(const QuantizedInput&) const = default;
};

// "Api|k1=v1&k2=v2" with parameters sorted by name.
std::string serialize_request(const ApiCallRecord& record);
std::string serialize_request(const std::string& api, const ParamList& params);

bool is_blank(char32_t c) noexcept;

// Column j holds the (j+1)-th character counted from the end of the text.
// Characters past l0 are ignored; blanks and characters outside the alphabet
// become zero columns; short texts leave trailing zero columns.
QuantizedInput quantize(std::string_view text, const Alphabet& alphabet,
                        std::size_t l0 = kDefaultInputLength);

}  // namespace apifk::predictor
