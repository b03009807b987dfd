#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace mindstone {

/// A lowercase term together with its byte range in the source text.
struct Token {
    std::string term;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Stopword list. Terms are stored lowercase; lookups expect lowercase input.
class Stopwords {
  public:
    Stopwords() = default;
    explicit Stopwords(std::vector<std::string> terms);

    /// The 33 classic Lucene English stopwords.
    static Stopwords english();
    static Stopwords none() { return Stopwords{}; }
    /// One term per line; blank lines and lines starting with '#' are ignored.
    static Stopwords load(const std::filesystem::path& path);

    void save(const std::filesystem::path& path) const;

    bool contains(std::string_view term) const {
        return set_.find(std::string(term)) != set_.end();
    }
    bool empty() const noexcept { return sorted_.empty(); }
    std::size_t size() const noexcept { return sorted_.size(); }
    const std::vector<std::string>& terms() const noexcept { return sorted_; }

    /// FNV-1a over the sorted, newline-joined list, as 16 hex digits.
    std::string hash() const;

  private:
    std::vector<std::string> sorted_;
    std::unordered_set<std::string> set_;
};

/// Splits on maximal runs of non-alphanumeric characters, lowercases ASCII,
/// drops stopwords. Offsets are byte offsets into `text`.
std::vector<Token> tokenize_spans(std::string_view text, const Stopwords& stopwords);

/// Number of tokens `tokenize_spans(text, Stopwords::none())` would return.
std::size_t count_tokens(std::string_view text);

/// Prefix of `text` ending right after its `max_tokens`-th token (stopwords
/// count as tokens). Returns `text` unchanged when it has fewer tokens.
std::string_view truncate_tokens(std::string_view text, std::size_t max_tokens);

bool is_word_codepoint(char32_t cp) noexcept;

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s) noexcept;

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
std::string hex64(std::uint64_t v);

/// Conversions between byte offsets and Unicode code point offsets of UTF-8
/// text. Offsets past the end clamp to the end.
std::size_t byte_to_codepoint_offset(std::string_view text, std::size_t byte_offset) noexcept;
std::size_t codepoint_to_byte_offset(std::string_view text, std::size_t cp_offset) noexcept;

}  // namespace mindstone
