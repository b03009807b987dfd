#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mindstone/config.hpp"
#include "mindstone/fusion.hpp"
#include "mindstone/index.hpp"
#include "mindstone/scorers.hpp"

namespace mindstone {

enum class Provenance { FirstPass, Rm3Pass };

struct ScoredCandidate {
    std::string para_id;
    double s_retriever = 0.0;
    double s_ranker = 0.0;
    Provenance provenance = Provenance::FirstPass;
};

/// Per-stage candidate counts and wall times of one answer() call.
struct StageTrace {
    std::size_t retrieved = 0;
    std::size_t ranked = 0;
    std::size_t rm3_new = 0;
    std::size_t read = 0;
    std::size_t answers = 0;
    double retrieve_ms = 0.0;
    double rank_ms = 0.0;
    double rm3_ms = 0.0;
    double read_ms = 0.0;
    double fuse_ms = 0.0;
    double total_ms = 0.0;

    double stage_sum_ms() const noexcept {
        return retrieve_ms + rank_ms + rm3_ms + read_ms + fuse_ms;
    }
    nlohmann::ordered_json to_json() const;
};

/// Stage outputs before fusion; fusion can be re-run on them cheaply.
struct CandidateSet {
    std::vector<ScoredParagraph> first_pass;
    /// Retrieval with the expanded query; empty unless neural RM3 ran.
    std::vector<ScoredParagraph> second_pass;
    /// Every ranked candidate, sorted by S_ranker descending, ties by para_id.
    std::vector<ScoredCandidate> pool;
    std::vector<SpanScores> read_spans;
};

struct AnswerResult {
    std::vector<RankedAnswer> answers;
    CandidateSet candidates;
    StageTrace trace;
};

struct BatchItem {
    std::optional<AnswerResult> result;
    std::string error;  // "<stage>: <message>" when result is empty
};

/// S_ranker for each paragraph, in input order, on up to `workers` threads.
std::vector<double> rank_candidates(const Ranker& ranker, std::string_view question,
                                    std::span<const Paragraph* const> paragraphs,
                                    const TruncationLimits& limits, std::size_t workers);
/// Reference loop for rank_candidates.
std::vector<double> rank_candidates_serial(const Ranker& ranker, std::string_view question,
                                           std::span<const Paragraph* const> paragraphs,
                                           const TruncationLimits& limits);

/// The retrieve -> rank -> (neural RM3) -> read -> fuse cascade. Holds
/// references to its components, which must outlive it.
class Pipeline {
  public:
    Pipeline(const InvertedIndex& index, const Ranker& ranker, const Reader& reader,
             PipelineConfig config, std::size_t workers = 1);

    /// Runs every stage for one question. Stage failures raise StageError.
    AnswerResult answer(std::string_view question) const;

    /// Stages 1-4 (no fusion).
    CandidateSet collect(std::string_view question, StageTrace* trace = nullptr) const;

    /// Stage 5 on collected candidates.
    std::vector<RankedAnswer> finalize(const CandidateSet& c, const FusionWeights& w) const;

    /// answer() for each question; output order matches input order. Questions
    /// run in parallel on `workers` threads; per-question errors are recorded
    /// and the batch continues.
    std::vector<BatchItem> answer_batch(std::span<const std::string> questions) const;
    /// Reference loop for answer_batch.
    std::vector<BatchItem> answer_batch_serial(std::span<const std::string> questions) const;

    const PipelineConfig& config() const noexcept { return config_; }
    const InvertedIndex& index() const noexcept { return *index_; }
    std::size_t workers() const noexcept { return workers_; }

  private:
    BatchItem answer_item(std::string_view question) const;

    const InvertedIndex* index_;
    const Ranker* ranker_;
    const Reader* reader_;
    PipelineConfig config_;
    std::size_t workers_;
};

/// One answer record; span offsets are converted to code points of the
/// paragraph's full_text.
nlohmann::ordered_json answer_record_json(std::string_view qid, const BatchItem& item,
                                          const InvertedIndex& index);

}  // namespace mindstone
