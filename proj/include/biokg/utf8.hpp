#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace biokg {

// Minimal UTF-8 codec. Invalid byte sequences decode to U+FFFD so that
// cleaning stays total over arbitrary input.
std::vector<char32_t> u8_decode(std::string_view text);
void u8_encode(char32_t cp, std::string& out);
std::string u8_encode(const std::vector<char32_t>& cps);

// Codepoint count (not bytes).
std::size_t u8_length(std::string_view text);

// Whitespace for trimming/collapsing: ASCII space/tab/newlines, NBSP,
// and the ideographic space U+3000.
bool is_space_cp(char32_t cp);

// Leading/trailing whitespace removed (codepoint-aware).
std::string trim(std::string_view text);

bool is_blank(std::string_view text);

}  // namespace biokg
