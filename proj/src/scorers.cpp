#include "mindstone/scorers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mindstone/errors.hpp"
#include "mindstone/metrics.hpp"

namespace mindstone {

void TruncationLimits::validate() const {
    if (ranker_para_tokens == 0 || reader_total_tokens == 0) {
        throw InvalidArgument("truncation limits must be positive");
    }
}

Paragraph truncate_paragraph(const Paragraph& p, std::size_t max_tokens) {
    auto cut = truncate_tokens(p.full_text, max_tokens);
    if (cut.size() == p.full_text.size()) return p;
    Paragraph out = p;
    out.full_text = std::string(cut);
    auto body_at = p.body_offset();
    if (cut.size() >= body_at) {
        out.body = out.full_text.substr(body_at);
    } else {
        out.title = out.full_text;
        out.body.clear();
    }
    return out;
}

double rank(const Ranker& ranker, std::string_view question, const Paragraph& paragraph,
            const TruncationLimits& limits) {
    return ranker.score(question, truncate_paragraph(paragraph, limits.ranker_para_tokens));
}

std::vector<AnswerSpan> read(const Reader& reader, std::string_view question,
                             const Paragraph& paragraph, std::size_t k,
                             const TruncationLimits& limits) {
    if (k == 0) throw InvalidArgument("read: k must be >= 1");
    const auto total = limits.reader_total_tokens;
    const auto q_tokens = count_tokens(question);
    const std::size_t para_budget = total > q_tokens ? total - q_tokens : 1;
    auto para = truncate_paragraph(paragraph, para_budget);
    const auto used = std::min(count_tokens(para.full_text), total);
    auto q = truncate_tokens(question, total - used);

    auto cands = reader.spans(q, para, k);
    if (cands.empty()) throw StageError("read", "reader returned no spans for " + paragraph.para_id);
    for (const auto& c : cands) {
        if (!(c.start < c.end && c.end <= para.full_text.size()) || !std::isfinite(c.score)) {
            throw StageError("read", "reader returned invalid span [" + std::to_string(c.start) +
                                         "," + std::to_string(c.end) + ") for " +
                                         paragraph.para_id);
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const SpanCandidate& a, const SpanCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.start < b.start;
    });
    if (cands.size() > k) cands.resize(k);

    std::vector<AnswerSpan> out;
    out.reserve(cands.size());
    for (const auto& c : cands) {
        out.push_back({paragraph.para_id, c.start, c.end,
                       paragraph.full_text.substr(c.start, c.end - c.start), c.score});
    }
    return out;
}

std::string ConstantRanker::descriptor() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "constant:%.17g", value_);
    return buf;
}

double OracleRanker::score(std::string_view question, const Paragraph& paragraph) const {
    auto it = key_.find(question);
    if (it == key_.end()) return -1.0;
    return contains_answer(paragraph.full_text, it->second) ? 1.0 : -1.0;
}

std::vector<SpanCandidate> OracleReader::spans(std::string_view question,
                                               const Paragraph& paragraph, std::size_t) const {
    const auto text = to_lower_ascii(paragraph.full_text);
    if (auto it = key_.find(question); it != key_.end()) {
        for (const auto& gold : it->second) {
            auto g = to_lower_ascii(trim(gold));
            if (g.empty()) continue;
            if (auto pos = text.find(g); pos != std::string::npos) {
                return {{pos, pos + g.size(), 1.0}};
            }
        }
    }
    auto toks = tokenize_spans(paragraph.full_text, Stopwords::none());
    if (toks.empty()) return {{0, paragraph.full_text.size(), 0.0}};
    return {{toks.front().begin, toks.front().end, 0.0}};
}

}  // namespace mindstone
