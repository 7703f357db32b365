#include "utf8.hpp"

namespace relan::utf8 {

std::vector<CodePoint> decode(std::string_view text) {
    std::vector<CodePoint> out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        char32_t cp = b0;
        if (b0 >= 0xF0 && b0 < 0xF8) {
            len = 4;
            cp = b0 & 0x07;
        } else if (b0 >= 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if (b0 >= 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if (b0 >= 0x80) {
            len = 0;
        }
        bool ok = len != 0 && i + len <= text.size() && !(b0 >= 0xF8);
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) ok = false;
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) {
            out.push_back({0xFFFD, i, 1});
            ++i;
            continue;
        }
        out.push_back({cp, i, len});
        i += len;
    }
    return out;
}

std::string encode(char32_t cp) {
    std::string s;
    if (cp < 0x80) {
        s += static_cast<char>(cp);
    } else if (cp < 0x800) {
        s += static_cast<char>(0xC0 | (cp >> 6));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        s += static_cast<char>(0xE0 | (cp >> 12));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        s += static_cast<char>(0xF0 | (cp >> 18));
        s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return s;
}

bool is_space(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0;
}

bool is_ident_start(char32_t c) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return true;
    if (c >= 0xC0 && c <= 0x24F && c != 0xD7 && c != 0xF7) return true;  // Latin-1 / Extended-A,B
    if (c >= 0x370 && c <= 0x3FF && c != 0x37E && c != 0x387) return true;  // Greek
    if (c >= 0x1F00 && c <= 0x1FFF) return true;                          // Greek extended
    if (c >= 0x2100 && c <= 0x214F) return true;                          // letter-like (ℕ, ℝ)
    if (c >= 0x1D400 && c <= 0x1D7FF) return true;                        // math alphanumerics
    return false;
}

bool is_ident_char(char32_t c) {
    if (is_ident_start(c)) return true;
    if (c >= '0' && c <= '9') return true;
    if (c == '\'' || c == '.') return true;
    if (c >= 0x2080 && c <= 0x209C) return true;  // subscript digits and letters
    if (c >= 0x1D62 && c <= 0x1D6A) return true;  // more subscript letters
    return false;
}

bool is_open_bracket(char32_t c) {
    return c == '(' || c == '[' || c == '{' || c == 0x27E8 /* ⟨ */ || c == 0x2983 /* ⦃ */ ||
           c == 0x2039 /* ‹ */ || c == 0xAB /* « */;
}

bool is_close_bracket(char32_t c) {
    return c == ')' || c == ']' || c == '}' || c == 0x27E9 || c == 0x2984 || c == 0x203A || c == 0xBB;
}

}  // namespace relan::utf8
