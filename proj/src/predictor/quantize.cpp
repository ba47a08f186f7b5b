#include "apifk/predictor/quantize.hpp"

#include <algorithm>

#include "apifk/errors.hpp"
#include "apifk/utf8.hpp"

namespace apifk::predictor {

std::vector<double> QuantizedInput::dense() const {
  std::vector<double> m(alphabet_size * columns.size(), 0.0);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= 0) {
      m[static_cast<std::size_t>(columns[j]) * columns.size() + j] = 1.0;
    }
  }
  return m;
}

std::size_t QuantizedInput::nonzero_columns() const {
  return static_cast<std::size_t>(
      std::count_if(columns.begin(), columns.end(), [](std::int32_t c) { return c >= 0; }));
}

std::string serialize_request(const std::string& api, const ParamList& params) {
  std::vector<const std::pair<std::string, std::string>*> sorted;
  sorted.reserve(params.size());
  for (const auto& p : params) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });
  std::string out = api;
  out.push_back('|');
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0) out.push_back('&');
    out += sorted[i]->first;
    out.push_back('=');
    out += sorted[i]->second;
  }
  return out;
}

std::string serialize_request(const ApiCallRecord& record) {
  return serialize_request(record.api, record.params);
}

bool is_blank(char32_t c) noexcept {
  switch (c) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\v':
    case U'\f':
    case 0x00A0:
    case 0x3000:
      return true;
    default:
      return false;
  }
}

QuantizedInput quantize(std::string_view text, const Alphabet& alphabet, std::size_t l0) {
  if (l0 == 0) {
    throw InvalidConfig("quantization length must be positive");
  }
  const auto chars = utf8::decode(text);
  QuantizedInput q;
  q.alphabet_size = alphabet.size();
  q.columns.assign(l0, -1);
  const std::size_t n = std::min(chars.size(), l0);
  for (std::size_t j = 0; j < n; ++j) {
    const char32_t c = chars[chars.size() - 1 - j];
    if (!is_blank(c)) {
      q.columns[j] = alphabet.index_of(c);
    }
  }
  return q;
}

}  // namespace apifk::predictor
