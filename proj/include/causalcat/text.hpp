#pragma once

// Low-level text utilities shared by the corpus loader, the discourse rules
// and the tokenizer. All functions operate on UTF-8 bytes.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace causalcat::text {

/// True iff `s` is well-formed UTF-8 (no overlongs, no surrogates, <= U+10FFFF).
inline bool is_valid_utf8(std::string_view s) {
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len = 0;
        char32_t cp = 0;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > n) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

/// Number of bytes of the whitespace code point starting at `pos`, or 0.
/// Covers ASCII whitespace plus the Unicode space separators a Python
/// `str.split()` would also break on.
inline std::size_t whitespace_at(std::string_view s, std::size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 == ' ' || (b0 >= 0x09 && b0 <= 0x0D) || (b0 >= 0x1C && b0 <= 0x1F)) return 1;
    if (b0 == 0xC2 && pos + 1 < s.size()) {
        const auto b1 = static_cast<unsigned char>(s[pos + 1]);
        if (b1 == 0xA0 || b1 == 0x85) return 2;
    }
    if (pos + 2 < s.size()) {
        const auto b1 = static_cast<unsigned char>(s[pos + 1]);
        const auto b2 = static_cast<unsigned char>(s[pos + 2]);
        if (b0 == 0xE1 && b1 == 0x9A && b2 == 0x80) return 3;  // U+1680
        if (b0 == 0xE2 && b1 == 0x80 && ((b2 >= 0x80 && b2 <= 0x8A) || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF))
            return 3;
        if (b0 == 0xE2 && b1 == 0x81 && b2 == 0x9F) return 3;  // U+205F
        if (b0 == 0xE3 && b1 == 0x80 && b2 == 0x80) return 3;  // U+3000
    }
    return 0;
}

/// Maximal non-whitespace runs of `s`, as views into it.
inline std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    std::size_t start = std::string_view::npos;
    while (i < s.size()) {
        const std::size_t ws = whitespace_at(s, i);
        if (ws > 0) {
            if (start != std::string_view::npos) {
                out.push_back(s.substr(start, i - start));
                start = std::string_view::npos;
            }
            i += ws;
        } else {
            if (start == std::string_view::npos) start = i;
            ++i;
        }
    }
    if (start != std::string_view::npos) out.push_back(s.substr(start));
    return out;
}

/// Word count: number of maximal non-whitespace runs.
inline std::size_t word_length(std::string_view s) {
    std::size_t count = 0;
    bool in_word = false;
    std::size_t i = 0;
    while (i < s.size()) {
        const std::size_t ws = whitespace_at(s, i);
        if (ws > 0) {
            in_word = false;
            i += ws;
        } else {
            if (!in_word) ++count;
            in_word = true;
            ++i;
        }
    }
    return count;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && whitespace_at(s, b) > 0) b += whitespace_at(s, b);
    while (e > b) {
        // Step back over one whitespace code point (all are <= 3 bytes).
        bool stepped = false;
        for (std::size_t len = 1; len <= 3 && len <= e - b; ++len) {
            if (whitespace_at(s, e - len) == len) {
                e -= len;
                stepped = true;
                break;
            }
        }
        if (!stepped) break;
    }
    return std::string(s.substr(b, e - b));
}

/// Collapses whitespace runs to single ASCII spaces and trims the ends.
inline std::string normalize_whitespace(std::string_view s) {
    std::string out;
    for (const auto word : split_whitespace(s)) {
        if (!out.empty()) out.push_back(' ');
        out.append(word);
    }
    return out;
}

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

namespace detail {

inline bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > s.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
        char c = s[pos + k];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c != prefix[k]) return false;
    }
    return true;
}

inline bool is_ascii_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

}  // namespace detail

/// Removes raw URLs (`http://`, `https://`, `www.` up to the next
/// whitespace). A URL only starts at a non-alphanumeric boundary.
inline std::string strip_urls(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const bool boundary = i == 0 || !detail::is_ascii_alnum(s[i - 1]);
        if (boundary && (detail::starts_with_ci(s, i, "http://") || detail::starts_with_ci(s, i, "https://") ||
                         detail::starts_with_ci(s, i, "www."))) {
            while (i < s.size() && whitespace_at(s, i) == 0) ++i;
            continue;
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

/// Drops C0/C1 control characters other than tab, newline and carriage return.
inline std::string strip_control(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<unsigned char>(s[i]);
        if ((c < 0x20 && c != '\t' && c != '\n' && c != '\r') || c == 0x7F) continue;
        if (c == 0xC2 && i + 1 < s.size()) {
            const auto c1 = static_cast<unsigned char>(s[i + 1]);
            if (c1 >= 0x80 && c1 <= 0x9F && c1 != 0x85) {
                ++i;
                continue;
            }
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

/// Cleaning applied before tokenization: URLs and control characters removed,
/// everything else preserved.
inline std::string clean_for_model(std::string_view s) { return strip_control(strip_urls(s)); }

/// Splits text into word and punctuation tokens. Letters, digits and any
/// non-ASCII byte form words; an apostrophe or hyphen stays inside a word when
/// both neighbours are word characters. A run of one repeated punctuation
/// character ("...", "!!") is a single token.
inline std::vector<std::string> word_tokens(std::string_view s) {
    auto is_word = [](char c) { return detail::is_ascii_alnum(c) || static_cast<unsigned char>(c) >= 0x80; };
    std::vector<std::string> out;
    for (const auto chunk : split_whitespace(s)) {
        std::size_t i = 0;
        while (i < chunk.size()) {
            if (is_word(chunk[i])) {
                std::size_t j = i + 1;
                while (j < chunk.size()) {
                    if (is_word(chunk[j])) {
                        ++j;
                    } else if ((chunk[j] == '\'' || chunk[j] == '-') && j + 1 < chunk.size() && is_word(chunk[j + 1])) {
                        j += 2;
                    } else {
                        break;
                    }
                }
                out.emplace_back(chunk.substr(i, j - i));
                i = j;
            } else {
                std::size_t j = i + 1;
                while (j < chunk.size() && chunk[j] == chunk[i]) ++j;
                out.emplace_back(chunk.substr(i, j - i));
                i = j;
            }
        }
    }
    return out;
}

/// True for tokens made only of ASCII punctuation.
inline bool is_punctuation(std::string_view token) {
    if (token.empty()) return false;
    for (const char c : token)
        if (detail::is_ascii_alnum(c) || static_cast<unsigned char>(c) >= 0x80) return false;
    return true;
}

}  // namespace causalcat::text
