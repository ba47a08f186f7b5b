#pragma once

#include <string>
#include <string_view>

namespace apifk::utf8 {

// Decodes UTF-8 into code points. Invalid bytes decode to themselves
// (0x80..0xFF) so that every input byte sequence maps to some sequence of
// characters and encode(decode(s)) == s for valid input.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);

void append(std::string& out, char32_t cp);

// Number of code points (same convention as decode()).
std::size_t length(std::string_view text);

}  // namespace apifk::utf8
