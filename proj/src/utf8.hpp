#pragma once

#include <string>
#include <string_view>

namespace polyg2p::utf8 {

// Invalid byte sequences decode to U+FFFD, one replacement per offending byte.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

// Number of Unicode scalar values.
std::size_t length(std::string_view text);

}  // namespace polyg2p::utf8
