#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>

namespace apifk::predictor {

// Ordered character set for one-hot quantization.
class Alphabet {
 public:
  // 26 lowercase + 26 uppercase + 10 digits + the 32 printable ASCII
  // punctuation characters + 2 reserved private-use slots (U+E000, U+E001)
  // = 96 entries.
  static Alphabet default_alphabet();

  // Throws InvalidConfig when empty or when a character repeats.
  explicit Alphabet(std::u32string chars);

  // UTF-8 text file; every code point except '\n' and '\r' is one entry.
  static Alphabet from_file(const std::string& path);
  static Alphabet from_utf8(std::string_view text);

  std::size_t size() const noexcept { return chars_.size(); }
  const std::u32string& chars() const noexcept { return chars_; }

  // -1 when the character is not in the alphabet.
  int index_of(char32_t c) const noexcept {
    if (c < ascii_.size()) return ascii_[c];
    auto it = other_.find(c);
    return it == other_.end() ? -1 : it->second;
  }

  bool operator==(const Alphabet& other) const { return chars_ == other.chars_; }

 private:
  std::u32string chars_;
  std::array<int, 128> ascii_{};
  std::unordered_map<char32_t, int> other_;
};

}  // namespace apifk::predictor
