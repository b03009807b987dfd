#include "mindstone/datasets.hpp"

#include <algorithm>
#include <random>

#include "mindstone/errors.hpp"
#include "mindstone/jsonl.hpp"
#include "mindstone/metrics.hpp"

namespace mindstone {

namespace {

std::vector<std::string> normalized(const std::vector<std::string>& answers) {
    std::vector<std::string> out;
    out.reserve(answers.size());
    for (const auto& a : answers) out.push_back(normalize_answer(a));
    return out;
}

RankExample labelled(const QaPair& q, const Paragraph& p, const std::vector<std::string>& golds) {
    int label = contains_normalized(normalize_answer(p.full_text), golds) ? 1 : 0;
    return {q.question, p.para_id, p.full_text, label};
}

}  // namespace

std::vector<RankExample> build_dataset_finetune(const std::vector<QaPair>& pairs,
                                                const InvertedIndex& corpus, std::uint64_t seed) {
    // Paragraph ordinals grouped by article, in corpus order.
    std::unordered_map<std::string, std::vector<std::size_t>> by_article;
    for (std::size_t i = 0; i < corpus.doc_count(); ++i) {
        by_article[corpus.paragraph(i).article_id].push_back(i);
    }

    std::vector<RankExample> out;
    for (const auto& q : pairs) {
        if (!q.gold_para_id) continue;
        auto gold_ord = corpus.ordinal(*q.gold_para_id);
        if (!gold_ord) continue;
        const auto& gold = corpus.paragraph(*gold_ord);
        auto golds = normalized(q.answers);
        out.push_back({q.question, gold.para_id, gold.full_text, 1});

        std::vector<std::size_t> eligible;
        for (auto ord : by_article[gold.article_id]) {
            if (ord == *gold_ord) continue;
            if (!contains_normalized(normalize_answer(corpus.paragraph(ord).full_text), golds)) {
                eligible.push_back(ord);
            }
        }
        if (eligible.empty()) continue;
        std::mt19937_64 rng(fnv1a64(q.qid, seed ^ 0x9e3779b97f4a7c15ULL));
        const auto& neg = corpus.paragraph(eligible[rng() % eligible.size()]);
        out.push_back({q.question, neg.para_id, neg.full_text, 0});
    }
    return out;
}

std::vector<RankExample> build_dataset_aug1(const std::vector<QaPair>& questions,
                                            const InvertedIndex& index, std::size_t n) {
    std::vector<RankExample> out;
    for (const auto& q : questions) {
        auto golds = normalized(q.answers);
        for (const auto& hit : retrieve(index, q.question, n).hits) {
            out.push_back(labelled(q, index.paragraph(hit.para_id), golds));
        }
    }
    return out;
}

std::vector<RankExample> build_dataset_aug2(const std::vector<QaPair>& questions,
                                            const InvertedIndex& index, const Ranker& ranker,
                                            const TruncationLimits& limits, std::size_t m,
                                            std::size_t n) {
    if (m < n) throw InvalidArgument("build_dataset_aug2: m must be >= n");
    std::vector<RankExample> out;
    for (const auto& q : questions) {
        auto golds = normalized(q.answers);
        auto hits = retrieve(index, q.question, m).hits;
        std::vector<std::pair<const Paragraph*, double>> scored;
        scored.reserve(hits.size());
        for (const auto& hit : hits) {
            const auto& p = index.paragraph(hit.para_id);
            scored.emplace_back(&p, rank(ranker, q.question, p, limits));
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        for (std::size_t i = 0; i < std::min(n, scored.size()); ++i) {
            out.push_back(labelled(q, *scored[i].first, golds));
        }
    }
    return out;
}

std::vector<RankExample> read_rank_examples(const std::filesystem::path& path) {
    std::vector<RankExample> out;
    jsonl::for_each(path, [&](const jsonl::json& j, std::size_t lineno) {
        auto where = path.string() + ":" + std::to_string(lineno);
        auto label = j.find("label");
        if (label == j.end() || !label->is_number_integer() ||
            (label->get<int>() != 0 && label->get<int>() != 1)) {
            throw FormatError(where + ": label must be 0 or 1");
        }
        out.push_back({jsonl::require_string(j, "question", where),
                       jsonl::require_string(j, "para_id", where),
                       jsonl::require_string(j, "text", where), label->get<int>()});
    });
    return out;
}

void write_rank_examples(const std::filesystem::path& path, const std::vector<RankExample>& data) {
    auto out = jsonl::open_out(path);
    for (const auto& e : data) {
        nlohmann::ordered_json j{
            {"question", e.question}, {"para_id", e.para_id}, {"text", e.text}, {"label", e.label}};
        out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
}

}  // namespace mindstone
