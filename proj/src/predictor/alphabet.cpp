#include "apifk/predictor/alphabet.hpp"

#include <fstream>
#include <sstream>

#include "apifk/errors.hpp"
#include "apifk/utf8.hpp"

namespace apifk::predictor {

Alphabet Alphabet::default_alphabet() {
  std::u32string chars;
  for (char32_t c = U'a'; c <= U'z'; ++c) chars.push_back(c);
  for (char32_t c = U'A'; c <= U'Z'; ++c) chars.push_back(c);
  for (char32_t c = U'0'; c <= U'9'; ++c) chars.push_back(c);
  chars += U"-,;.!?:'\"/\\|_@#$%^&*~`+=<>()[]{}";
  chars.push_back(0xE000);
  chars.push_back(0xE001);
  return Alphabet(std::move(chars));
}

Alphabet::Alphabet(std::u32string chars) : chars_(std::move(chars)) {
  if (chars_.empty()) {
    throw InvalidConfig("alphabet must not be empty");
  }
  ascii_.fill(-1);
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    const char32_t c = chars_[i];
    const bool fresh = c < ascii_.size() ? ascii_[c] < 0 : !other_.contains(c);
    if (!fresh) {
      throw InvalidConfig("alphabet repeats character U+" + std::to_string(c));
    }
    if (c < ascii_.size()) {
      ascii_[c] = static_cast<int>(i);
    } else {
      other_.emplace(c, static_cast<int>(i));
    }
  }
}

Alphabet Alphabet::from_utf8(std::string_view text) {
  std::u32string chars;
  for (char32_t c : utf8::decode(text)) {
    if (c != U'\n' && c != U'\r') chars.push_back(c);
  }
  return Alphabet(std::move(chars));
}

Alphabet Alphabet::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open alphabet file " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_utf8(buf.str());
}

}  // namespace apifk::predictor
