#include "mindstone/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_set>

#include "mindstone/errors.hpp"
#include "mindstone/expansion.hpp"
#include "mindstone/parallel.hpp"

namespace mindstone {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

bool ranker_order(const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.s_ranker != b.s_ranker) return a.s_ranker > b.s_ranker;
    return a.para_id < b.para_id;
}

}  // namespace

nlohmann::ordered_json StageTrace::to_json() const {
    return {{"retrieved", retrieved}, {"ranked", ranked},       {"rm3_new", rm3_new},
            {"read", read},           {"answers", answers},     {"retrieve_ms", retrieve_ms},
            {"rank_ms", rank_ms},     {"rm3_ms", rm3_ms},       {"read_ms", read_ms},
            {"fuse_ms", fuse_ms},     {"total_ms", total_ms}};
}

std::vector<double> rank_candidates(const Ranker& ranker, std::string_view question,
                                    std::span<const Paragraph* const> paragraphs,
                                    const TruncationLimits& limits, std::size_t workers) {
    std::vector<double> out(paragraphs.size());
    parallel_for(paragraphs.size(), workers, [&](std::size_t i) {
        out[i] = rank(ranker, question, *paragraphs[i], limits);
    });
    return out;
}

std::vector<double> rank_candidates_serial(const Ranker& ranker, std::string_view question,
                                           std::span<const Paragraph* const> paragraphs,
                                           const TruncationLimits& limits) {
    std::vector<double> out;
    out.reserve(paragraphs.size());
    for (const auto* p : paragraphs) out.push_back(rank(ranker, question, *p, limits));
    return out;
}

Pipeline::Pipeline(const InvertedIndex& index, const Ranker& ranker, const Reader& reader,
                   PipelineConfig config, std::size_t workers)
    : index_(&index), ranker_(&ranker), reader_(&reader), config_(std::move(config)),
      workers_(std::max<std::size_t>(1, workers)) {
    config_.validate();
}

CandidateSet Pipeline::collect(std::string_view question, StageTrace* trace) const {
    StageTrace local;
    StageTrace& tr = trace ? *trace : local;
    const auto& cfg = config_;
    CandidateSet out;

    // 1. Retrieve.
    auto t0 = Clock::now();
    out.first_pass = in_stage("retrieve", [&] {
        return retrieve(*index_, question, cfg.n_retriever).hits;
    });
    tr.retrieved = out.first_pass.size();
    tr.retrieve_ms = ms_since(t0);

    // 2. Rank everything retrieved.
    t0 = Clock::now();
    std::vector<const Paragraph*> paras;
    paras.reserve(out.first_pass.size());
    for (const auto& h : out.first_pass) paras.push_back(&index_->paragraph(h.para_id));
    auto scores = in_stage("rank", [&] {
        return rank_candidates(*ranker_, question, paras, cfg.limits, workers_);
    });
    out.pool.reserve(out.first_pass.size());
    for (std::size_t i = 0; i < out.first_pass.size(); ++i) {
        out.pool.push_back({out.first_pass[i].para_id, out.first_pass[i].score, scores[i],
                            Provenance::FirstPass});
    }
    tr.ranked = out.pool.size();
    tr.rank_ms = ms_since(t0);

    // 3. Neural RM3: expand with positively ranked documents, retrieve again,
    //    rank only the new candidates.
    if (cfg.rm3.enabled && !out.pool.empty()) {
        t0 = Clock::now();
        in_stage("rm3", [&] {
            std::vector<std::pair<std::string, double>> ranked;
            ranked.reserve(out.pool.size());
            for (const auto& c : out.pool) ranked.emplace_back(c.para_id, c.s_ranker);
            auto q = question_vector(*index_, question);
            auto expanded = expand_query(q, ranked, *index_, cfg.rm3);
            out.second_pass = retrieve_weighted(*index_, expanded, cfg.second_pass_n_effective()).hits;
            const auto& second = out.second_pass;

            std::unordered_set<std::string> seen;
            for (const auto& c : out.pool) seen.insert(c.para_id);
            std::vector<const Paragraph*> fresh;
            for (const auto& h : second) {
                if (seen.insert(h.para_id).second) fresh.push_back(&index_->paragraph(h.para_id));
            }
            auto fresh_scores = rank_candidates(*ranker_, question, fresh, cfg.limits, workers_);
            QueryVector counts;
            if (cfg.rm3_rescore_original) counts = question_term_counts(*index_, question);
            for (std::size_t i = 0; i < fresh.size(); ++i) {
                double s_retriever = 0.0;
                if (cfg.rm3_rescore_original) {
                    auto ord = *index_->ordinal(fresh[i]->para_id);
                    for (const auto& [t, qtf] : counts) s_retriever += qtf * index_->bm25_score(t, ord);
                }
                out.pool.push_back({fresh[i]->para_id, s_retriever, fresh_scores[i], Provenance::Rm3Pass});
            }
            tr.rm3_new = fresh.size();
            tr.ranked += fresh.size();
            return 0;
        });
        tr.rm3_ms = ms_since(t0);
    }

    // 4. Read the top candidates by S_ranker.
    t0 = Clock::now();
    std::sort(out.pool.begin(), out.pool.end(), ranker_order);
    const auto n_read = std::min(cfg.n_reader_effective(), out.pool.size());
    std::vector<std::vector<AnswerSpan>> spans(n_read);
    in_stage("read", [&] {
        parallel_for(n_read, workers_, [&](std::size_t i) {
            spans[i] = read(*reader_, question, index_->paragraph(out.pool[i].para_id),
                            cfg.k_spans_per_paragraph, cfg.limits);
        });
        return 0;
    });
    for (std::size_t i = 0; i < n_read; ++i) {
        const auto& c = out.pool[i];
        for (auto& s : spans[i]) {
            out.read_spans.push_back({c.para_id, s.start_char, s.end_char, std::move(s.text),
                                      c.s_retriever, c.s_ranker, s.s_reader});
        }
    }
    tr.read = n_read;
    tr.read_ms = ms_since(t0);
    return out;
}

std::vector<RankedAnswer> Pipeline::finalize(const CandidateSet& c, const FusionWeights& w) const {
    return in_stage("fuse", [&] { return fuse_answers(c.read_spans, w); });
}

AnswerResult Pipeline::answer(std::string_view question) const {
    const auto start = Clock::now();
    AnswerResult out;
    out.candidates = collect(question, &out.trace);
    auto t0 = Clock::now();
    out.answers = finalize(out.candidates, config_.weights);
    out.trace.answers = out.answers.size();
    out.trace.fuse_ms = ms_since(t0);
    out.trace.total_ms = ms_since(start);
    return out;
}

BatchItem Pipeline::answer_item(std::string_view question) const {
    BatchItem item;
    try {
        item.result = answer(question);
    } catch (const std::exception& e) {
        item.error = e.what();
    }
    return item;
}

std::vector<BatchItem> Pipeline::answer_batch(std::span<const std::string> questions) const {
    std::vector<BatchItem> out(questions.size());
    parallel_for(questions.size(), workers_, [&](std::size_t i) { out[i] = answer_item(questions[i]); });
    return out;
}

std::vector<BatchItem> Pipeline::answer_batch_serial(std::span<const std::string> questions) const {
    std::vector<BatchItem> out;
    out.reserve(questions.size());
    for (const auto& q : questions) out.push_back(answer_item(q));
    return out;
}

nlohmann::ordered_json answer_record_json(std::string_view qid, const BatchItem& item,
                                          const InvertedIndex& index) {
    nlohmann::ordered_json j;
    j["qid"] = qid;
    auto answers = nlohmann::ordered_json::array();
    if (item.result) {
        for (const auto& a : item.result->answers) {
            const auto& text = index.paragraph(a.para_id).full_text;
            answers.push_back({{"text", a.text},
                               {"para_id", a.para_id},
                               {"start", byte_to_codepoint_offset(text, a.start)},
                               {"end", byte_to_codepoint_offset(text, a.end)},
                               {"s_retriever", a.s_retriever},
                               {"s_ranker", a.s_ranker},
                               {"s_reader", a.s_reader},
                               {"fused", a.fused}});
        }
    }
    j["answers"] = std::move(answers);
    j["trace"] = item.result ? item.result->trace.to_json() : nlohmann::ordered_json::object();
    if (!item.result) j["error"] = item.error;
    return j;
}

}  // namespace mindstone
