#include "mindstone/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "mindstone/corpus.hpp"

namespace mindstone {

namespace {

bool is_ascii_punct(unsigned char c) {
    return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
           (c >= 123 && c <= 126);
}

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t b = i;
        while (i < s.size() && !is_space(static_cast<unsigned char>(s[i]))) ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

double token_f1(std::string_view pred, std::string_view gold) {
    auto p = split_ws(pred);
    auto g = split_ws(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::map<std::string_view, int> counts;
    for (auto t : g) ++counts[t];
    int common = 0;
    for (auto t : p) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    double precision = static_cast<double>(common) / static_cast<double>(p.size());
    double recall = static_cast<double>(common) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::string normalize_answer(std::string_view s) {
    std::string cleaned;
    cleaned.reserve(s.size());
    for (unsigned char c : s) {
        if (is_ascii_punct(c)) continue;
        cleaned.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                               : static_cast<char>(c));
    }
    std::string out;
    for (auto tok : split_ws(cleaned)) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out.append(tok);
    }
    return out;
}

bool exact_match(std::string_view prediction, std::span<const std::string> golds) {
    auto p = normalize_answer(prediction);
    return std::any_of(golds.begin(), golds.end(),
                       [&](const std::string& g) { return normalize_answer(g) == p; });
}

double f1_score(std::string_view prediction, std::span<const std::string> golds) {
    auto p = normalize_answer(prediction);
    double best = 0.0;
    for (const auto& g : golds) best = std::max(best, token_f1(p, normalize_answer(g)));
    return best;
}

bool contains_normalized(std::string_view normalized_text,
                         std::span<const std::string> normalized_golds) {
    return std::any_of(normalized_golds.begin(), normalized_golds.end(), [&](const auto& g) {
        return !g.empty() && normalized_text.find(g) != std::string_view::npos;
    });
}

bool contains_answer(std::string_view text, std::span<const std::string> golds) {
    std::vector<std::string> norm;
    norm.reserve(golds.size());
    for (const auto& g : golds) norm.push_back(normalize_answer(g));
    return contains_normalized(normalize_answer(text), norm);
}

double jaccard_similarity(std::string_view a, std::string_view b) {
    auto ta = tokenize(a, Stopwords::none());
    auto tb = tokenize(b, Stopwords::none());
    std::set<std::string> sa(ta.begin(), ta.end());
    std::set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

}  // namespace mindstone
