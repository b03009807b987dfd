#include "mindstone/corpus.hpp"

#include "mindstone/jsonl.hpp"

namespace mindstone {

std::string compose_full_text(std::string_view title, std::string_view body) {
    if (title.empty()) return std::string(body);
    std::string out;
    out.reserve(title.size() + 1 + body.size());
    out.append(title);
    out.push_back('\n');
    out.append(body);
    return out;
}

std::string make_para_id(std::string_view article_id, std::size_t position) {
    std::string id(article_id);
    id.push_back('#');
    id += std::to_string(position);
    return id;
}

Paragraph Paragraph::make(std::string article_id, std::string title, std::string body,
                          std::size_t position) {
    auto id = make_para_id(article_id, position);
    return with_id(std::move(id), std::move(article_id), std::move(title), std::move(body),
                   position);
}

Paragraph Paragraph::with_id(std::string para_id, std::string article_id, std::string title,
                             std::string body, std::size_t position) {
    Paragraph p;
    p.full_text = compose_full_text(title, body);
    p.para_id = std::move(para_id);
    p.article_id = std::move(article_id);
    p.title = std::move(title);
    p.body = std::move(body);
    p.position = position;
    return p;
}

std::vector<Paragraph> split_article(const Article& article) {
    std::vector<Paragraph> out;
    std::string_view body = article.body;
    std::string block;
    bool in_block = false;

    auto flush = [&] {
        auto t = trim(block);
        if (!t.empty()) {
            out.push_back(Paragraph::make(article.article_id, article.title, std::string(t),
                                          out.size()));
        }
        block.clear();
        in_block = false;
    };

    std::size_t pos = 0;
    while (pos <= body.size()) {
        auto nl = body.find('\n', pos);
        auto line = body.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                  : nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) {
            if (in_block) flush();
        } else {
            if (in_block) block.push_back('\n');
            block.append(line);
            in_block = true;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (in_block) flush();
    return out;
}

TermSequence tokenize(std::string_view text, const Stopwords& stopwords) {
    TermSequence out;
    for (auto& tok : tokenize_spans(text, stopwords)) out.push_back(std::move(tok.term));
    return out;
}

std::vector<Article> read_articles(const std::filesystem::path& path) {
    std::vector<Article> out;
    jsonl::for_each(path, [&](const jsonl::json& j, std::size_t lineno) {
        auto where = path.string() + ":" + std::to_string(lineno);
        Article a{jsonl::require_string(j, "article_id", where),
                  jsonl::require_string(j, "title", where),
                  jsonl::require_string(j, "body", where)};
        if (a.article_id.empty()) throw FormatError(where + ": empty article_id");
        out.push_back(std::move(a));
    });
    return out;
}

void write_articles(const std::filesystem::path& path, const std::vector<Article>& articles) {
    auto out = jsonl::open_out(path);
    for (const auto& a : articles) {
        jsonl::json j{{"article_id", a.article_id}, {"title", a.title}, {"body", a.body}};
        out << jsonl::dump(j) << '\n';
    }
}

std::vector<Paragraph> read_paragraphs(const std::filesystem::path& path) {
    std::vector<Paragraph> out;
    jsonl::for_each(path, [&](const jsonl::json& j, std::size_t lineno) {
        auto where = path.string() + ":" + std::to_string(lineno);
        auto pos = j.find("position");
        if (pos == j.end() || !pos->is_number_integer() || pos->get<long long>() < 0) {
            throw FormatError(where + ": missing non-negative integer field 'position'");
        }
        auto p = Paragraph::with_id(jsonl::require_string(j, "para_id", where),
                                    jsonl::require_string(j, "article_id", where),
                                    jsonl::require_string(j, "title", where),
                                    jsonl::require_string(j, "body", where),
                                    pos->get<std::size_t>());
        if (trim(p.body).empty()) throw FormatError(where + ": empty paragraph body");
        out.push_back(std::move(p));
    });
    return out;
}

void write_paragraphs(const std::filesystem::path& path, const std::vector<Paragraph>& paragraphs) {
    auto out = jsonl::open_out(path);
    for (const auto& p : paragraphs) {
        jsonl::json j{{"para_id", p.para_id},
                      {"article_id", p.article_id},
                      {"title", p.title},
                      {"body", p.body},
                      {"position", p.position}};
        out << jsonl::dump(j) << '\n';
    }
}

}  // namespace mindstone
