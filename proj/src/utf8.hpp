#pragma once

// UTF-8 decoding and the identifier character classes shared by the tactic
// and proof-state parsers.

#include <string>
#include <string_view>
#include <vector>

namespace relan::utf8 {

struct CodePoint {
    char32_t value = 0;
    std::size_t offset = 0;  // byte offset in the source
    std::size_t length = 0;  // byte length
};

// Invalid sequences decode to U+FFFD, one byte at a time.
std::vector<CodePoint> decode(std::string_view text);

std::string encode(char32_t cp);

bool is_space(char32_t c);
// Letters usable to start a Lean identifier: ASCII, Latin-1 letters, Greek,
// letter-like symbols and mathematical alphanumerics, plus '_'.
bool is_ident_start(char32_t c);
// is_ident_start plus digits, subscripts, apostrophe and dot.
bool is_ident_char(char32_t c);
bool is_open_bracket(char32_t c);
bool is_close_bracket(char32_t c);

}  // namespace relan::utf8
