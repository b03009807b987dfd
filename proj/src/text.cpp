#include "mindstone/text.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "mindstone/errors.hpp"

namespace mindstone {

namespace {

struct Decoded {
    char32_t cp;
    std::size_t len;
};

// Lenient UTF-8 decoder: an invalid lead or truncated sequence decodes as a
// single byte (U+FFFD), which counts as a word character.
Decoded decode(std::string_view s, std::size_t i) noexcept {
    auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) return {c, 1};
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
        return {0xFFFD, 1};
    }
    if (i + len > s.size()) return {0xFFFD, 1};
    for (std::size_t k = 1; k < len; ++k) {
        auto cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) return {0xFFFD, 1};
        cp = (cp << 6) | (cc & 0x3F);
    }
    return {cp, len};
}

template <typename Fn>
void for_each_token(std::string_view text, Fn&& fn) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        auto d = decode(text, i);
        if (!is_word_codepoint(d.cp)) {
            i += d.len;
            continue;
        }
        std::size_t begin = i;
        while (i < n) {
            d = decode(text, i);
            if (!is_word_codepoint(d.cp)) break;
            i += d.len;
        }
        if (!fn(begin, i)) return;
    }
}

}  // namespace

bool is_word_codepoint(char32_t cp) noexcept {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    // Latin-1 punctuation and symbols, general punctuation, CJK punctuation,
    // fullwidth ASCII punctuation.
    if (cp >= 0x80 && cp <= 0xBF) return cp == 0xAA || cp == 0xB2 || cp == 0xB3 || cp == 0xB5 ||
                                         cp == 0xB9 || cp == 0xBA;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;
    if (cp >= 0x2190 && cp <= 0x2BFF) return false;
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    if (cp == 0xFEFF) return false;
    return true;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<Token> tokenize_spans(std::string_view text, const Stopwords& stopwords) {
    std::vector<Token> out;
    for_each_token(text, [&](std::size_t b, std::size_t e) {
        std::string term = to_lower_ascii(text.substr(b, e - b));
        if (!stopwords.contains(term)) out.push_back({std::move(term), b, e});
        return true;
    });
    return out;
}

std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    for_each_token(text, [&](std::size_t, std::size_t) {
        ++n;
        return true;
    });
    return n;
}

std::string_view truncate_tokens(std::string_view text, std::size_t max_tokens) {
    if (max_tokens == 0) return text.substr(0, 0);
    std::size_t seen = 0;
    std::size_t cut = text.size();
    for_each_token(text, [&](std::size_t, std::size_t e) {
        if (++seen == max_tokens) {
            cut = e;
            return false;
        }
        return true;
    });
    return text.substr(0, cut);
}

Stopwords::Stopwords(std::vector<std::string> terms) {
    for (auto& t : terms) {
        auto lowered = to_lower_ascii(trim(t));
        if (!lowered.empty()) set_.insert(std::move(lowered));
    }
    sorted_.assign(set_.begin(), set_.end());
    std::sort(sorted_.begin(), sorted_.end());
}

Stopwords Stopwords::english() {
    return Stopwords({"a",    "an",   "and",  "are",   "as",    "at",   "be",    "but",  "by",
                      "for",  "if",   "in",   "into",  "is",    "it",   "no",    "not",  "of",
                      "on",   "or",   "such", "that",  "the",   "their", "then", "there", "these",
                      "they", "this", "to",   "was",   "will",  "with"});
}

Stopwords Stopwords::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open stopword file " + path.string());
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        terms.emplace_back(t);
    }
    return Stopwords(std::move(terms));
}

void Stopwords::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write stopword file " + path.string());
    for (const auto& t : sorted_) out << t << '\n';
}

std::string Stopwords::hash() const {
    std::string joined;
    for (const auto& t : sorted_) {
        joined += t;
        joined += '\n';
    }
    return hex64(fnv1a64(joined));
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) noexcept {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::size_t byte_to_codepoint_offset(std::string_view text, std::size_t byte_offset) noexcept {
    byte_offset = std::min(byte_offset, text.size());
    std::size_t cps = 0;
    std::size_t i = 0;
    while (i < byte_offset) {
        i += decode(text, i).len;
        ++cps;
    }
    return cps;
}

std::size_t codepoint_to_byte_offset(std::string_view text, std::size_t cp_offset) noexcept {
    std::size_t i = 0;
    std::size_t cps = 0;
    while (i < text.size() && cps < cp_offset) {
        i += decode(text, i).len;
        ++cps;
    }
    return i;
}

}  // namespace mindstone
