#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mindstone/text.hpp"

namespace mindstone {

struct Article {
    std::string article_id;
    std::string title;
    std::string body;  // paragraphs separated by blank lines
};

/// Title-prepended corpus unit. `full_text` is what gets indexed, ranked and
/// read; span offsets always refer to it.
struct Paragraph {
    std::string para_id;
    std::string article_id;
    std::string title;
    std::string body;
    std::size_t position = 0;
    std::string full_text;

    static Paragraph make(std::string article_id, std::string title, std::string body,
                          std::size_t position);
    /// Same as make() but keeps an explicit para_id (used when loading files).
    static Paragraph with_id(std::string para_id, std::string article_id, std::string title,
                             std::string body, std::size_t position);

    /// Byte offset in full_text where the body starts.
    std::size_t body_offset() const noexcept { return title.empty() ? 0 : title.size() + 1; }
};

std::string compose_full_text(std::string_view title, std::string_view body);
std::string make_para_id(std::string_view article_id, std::size_t position);

using TermSequence = std::vector<std::string>;

/// One paragraph per blank-line-delimited non-empty block of the body.
std::vector<Paragraph> split_article(const Article& article);

TermSequence tokenize(std::string_view text, const Stopwords& stopwords);

std::vector<Article> read_articles(const std::filesystem::path& path);
void write_articles(const std::filesystem::path& path, const std::vector<Article>& articles);
std::vector<Paragraph> read_paragraphs(const std::filesystem::path& path);
void write_paragraphs(const std::filesystem::path& path, const std::vector<Paragraph>& paragraphs);

}  // namespace mindstone
