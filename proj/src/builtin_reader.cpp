#include <algorithm>
#include <map>

#include "mindstone/builtin.hpp"

namespace mindstone {

namespace {

using Words = std::vector<std::string>;

bool has_phrase(const Words& toks, std::initializer_list<std::string_view> phrase) {
    const auto len = phrase.size();
    for (std::size_t i = 0; i + len <= toks.size(); ++i) {
        std::size_t k = 0;
        for (auto w : phrase) {
            if (toks[i + k] != w) break;
            ++k;
        }
        if (k == len) return true;
    }
    return false;
}

bool has_word(const Words& toks, std::initializer_list<std::string_view> words) {
    return std::any_of(toks.begin(), toks.end(), [&](const std::string& t) {
        return std::find(words.begin(), words.end(), t) != words.end();
    });
}

/// The noun right after "which"/"what", if any.
std::string_view wh_noun(const Words& toks) {
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i] == "which" || toks[i] == "what") return toks[i + 1];
    }
    return {};
}

bool is_boundary_gap(std::string_view gap) {
    return gap.find_first_of(",.;:()[]\"!?\n") != std::string_view::npos;
}

/// Sentence break: terminal punctuation followed by whitespace, or a newline.
bool is_sentence_gap(std::string_view gap) {
    if (gap.find('\n') != std::string_view::npos) return true;
    const auto p = gap.find_first_of(".!?");
    return p != std::string_view::npos && gap.find_first_of(" \t", p) != std::string_view::npos;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

struct Scored {
    std::size_t first;
    std::size_t last;  // inclusive token index
    double score;
};

}  // namespace

AnswerType answer_type(std::string_view question) {
    const auto toks = tokenize(question, Stopwords::none());
    const auto noun = wh_noun(toks);
    if (has_phrase(toks, {"how", "many"}) || has_phrase(toks, {"how", "much"}) ||
        has_phrase(toks, {"how", "old"}) || has_phrase(toks, {"how", "long"}) ||
        noun == "number" || noun == "length" || has_phrase(toks, {"what", "is", "the", "length"})) {
        return AnswerType::Number;
    }
    if (noun == "year" || noun == "decade" || has_word(toks, {"when"})) return AnswerType::Year;
    if (has_word(toks, {"who", "whom", "whose"})) return AnswerType::Person;
    if (has_word(toks, {"where"}) || noun == "city" || noun == "town" || noun == "river" ||
        noun == "country" || noun == "region" || noun == "mountain") {
        return AnswerType::Place;
    }
    if (!noun.empty() && noun != "is" && noun != "was" && noun != "did" && noun != "does") {
        return AnswerType::Entity;
    }
    return AnswerType::Any;
}

std::vector<SpanCandidate> BuiltinReader::spans(std::string_view question,
                                                const Paragraph& paragraph, std::size_t k) const {
    const std::string_view text = paragraph.full_text;
    const auto toks = tokenize_spans(text, Stopwords::none());
    const std::size_t n = toks.size();
    if (n == 0) return {{0, text.size(), 0.0}};

    const auto& P = params_;
    const auto& stop = index_->stopwords();
    std::map<std::string, std::size_t> qslot;
    std::vector<double> qterm_idf;
    for (const auto& t : tokenize(question, stop)) {
        if (qslot.emplace(t, qterm_idf.size()).second) qterm_idf.push_back(index_->idf(t));
    }
    std::vector<std::vector<std::size_t>> positions(qterm_idf.size());
    const double name_idf = P.name_idf_fraction * index_->idf(1u);

    std::vector<int> slot(n, -1);
    std::vector<std::size_t> sentence(n, 0);
    std::vector<char> is_stop(n, 0), capital(n, 0), number(n, 0), year(n, 0);
    std::vector<char> bound_left(n, 0), bound_right(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& tok = toks[i];
        if (auto it = qslot.find(tok.term); it != qslot.end()) {
            slot[i] = static_cast<int>(it->second);
            positions[it->second].push_back(i);
        }
        const auto gap = i == 0 ? std::string_view("\n")
                                : text.substr(toks[i - 1].end, tok.begin - toks[i - 1].end);
        const bool new_sentence = is_sentence_gap(gap);
        sentence[i] = i == 0 ? 0 : sentence[i - 1] + (new_sentence ? 1 : 0);
        bound_left[i] = is_boundary_gap(gap) ? 1 : 0;
        if (i > 0) bound_right[i - 1] = bound_left[i];

        // Possessive and contraction clitics ("'s") never bound a span.
        const bool clitic = gap == "'" || gap == "\u2019";
        is_stop[i] = stop.contains(tok.term) || clitic ? 1 : 0;
        const char c0 = text[tok.begin];
        const bool upper = c0 >= 'A' && c0 <= 'Z';
        capital[i] = upper && !is_stop[i] && (!new_sentence || index_->idf(tok.term) >= name_idf) ? 1 : 0;
        const auto raw = text.substr(tok.begin, tok.end - tok.begin);
        number[i] = all_digits(raw) ? 1 : 0;
        year[i] = (raw.size() == 4 && number[i] && raw >= "1000" && raw <= "2099") ? 1 : 0;
    }
    bound_right[n - 1] = 1;

    // Maximal runs of name-like capitalized tokens separated by single spaces.
    std::vector<std::size_t> run_start(n), run_end(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool joined = i > 0 && capital[i] && capital[i - 1] && toks[i].begin == toks[i - 1].end + 1 &&
                            text[toks[i - 1].end] == ' ';
        run_start[i] = joined ? run_start[i - 1] : i;
    }
    for (std::size_t i = n; i-- > 0;) {
        const bool joined = i + 1 < n && capital[i] && capital[i + 1] && run_start[i + 1] == run_start[i];
        run_end[i] = joined ? run_end[i + 1] : i;
    }

    const auto type = answer_type(question);
    std::vector<Scored> scored;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_stop[i]) continue;
        double inside = 0.0;
        for (std::size_t j = i; j < n && j - i < P.max_span_tokens && sentence[j] == sentence[i]; ++j) {
            if (slot[j] >= 0) inside += qterm_idf[static_cast<std::size_t>(slot[j])];
            if (is_stop[j]) continue;

            const std::size_t lo = i >= P.context_window ? i - P.context_window : 0;
            const std::size_t hi = std::min(n, j + 1 + P.context_window);
            double s = 0.0;
            for (std::size_t q = 0; q < positions.size(); ++q) {
                const auto& pos = positions[q];
                double best = 0.0;
                auto consider = [&](std::size_t p, std::size_t d) {
                    double w = qterm_idf[q] / (1.0 + P.proximity_decay * static_cast<double>(d - 1));
                    if (sentence[p] != sentence[i]) w *= P.cross_sentence_weight;
                    best = std::max(best, w);
                };
                auto it = std::lower_bound(pos.begin(), pos.end(), i);
                if (it != pos.begin() && *std::prev(it) >= lo) consider(*std::prev(it), i - *std::prev(it));
                auto jt = std::upper_bound(pos.begin(), pos.end(), j);
                if (jt != pos.end() && *jt < hi) consider(*jt, *jt - j);
                s += best;
            }
            s -= P.inside_penalty * inside;
            s -= P.length_penalty * static_cast<double>(j - i);

            const bool name = capital[i] && run_start[i] == i && run_end[i] == j && inside == 0.0;
            const bool single_number = i == j && number[i];
            switch (type) {
                case AnswerType::Person:
                case AnswerType::Place:
                case AnswerType::Entity:
                    if (name) s += P.type_bonus;
                    break;
                case AnswerType::Year:
                    if (i == j && year[i]) s += P.type_bonus;
                    break;
                case AnswerType::Number:
                    if (single_number) s += year[i] ? 0.5 * P.type_bonus : P.type_bonus;
                    break;
                case AnswerType::Any:
                    if (name || single_number) s += 0.5 * P.type_bonus;
                    break;
            }
            if (bound_left[i] && bound_right[j]) s += P.clause_bonus;
            scored.push_back({i, j, s});
        }
    }
    if (scored.empty()) return {{toks.front().begin, toks.front().end, 0.0}};

    auto better = [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.first != b.first) return a.first < b.first;
        return a.last < b.last;
    };
    const auto keep = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), better);
    std::vector<SpanCandidate> out;
    out.reserve(keep);
    for (std::size_t r = 0; r < keep; ++r) {
        out.push_back({toks[scored[r].first].begin, toks[scored[r].last].end, scored[r].score});
    }
    return out;
}

}  // namespace mindstone
