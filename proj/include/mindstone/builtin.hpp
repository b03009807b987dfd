#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mindstone/datasets.hpp"
#include "mindstone/index.hpp"
#include "mindstone/scorers.hpp"

namespace mindstone {

inline constexpr int kFeatureSpecVersion = 1;
inline constexpr std::size_t kRankerFeatureCount = 6;

using RankerFeatures = std::array<double, kRankerFeatureCount>;

/// Feature vector (feature set version 1) of a question/paragraph pair:
///   0  BM25 of the question against the paragraph
///   1  distinct question terms present
///   2  idf-weighted overlap
///   3  fraction of question terms covered
///   4  log(1 + paragraph length in indexed terms)
///   5  distinct question terms present in the title
/// Corpus statistics (idf, average length) come from `index`.
RankerFeatures ranker_features(const InvertedIndex& index, std::string_view question,
                               const Paragraph& paragraph);

/// Linear logistic model over RankerFeatures; the score is the logit.
struct BuiltinRankerModel {
    RankerFeatures weights{};
    double bias = 0.0;
    int feature_spec_version = kFeatureSpecVersion;

    double logit(const RankerFeatures& f) const noexcept;

    void save(const std::filesystem::path& path) const;
    static BuiltinRankerModel load(const std::filesystem::path& path);
};

class BuiltinRanker final : public Ranker {
  public:
    BuiltinRanker(const InvertedIndex& index, BuiltinRankerModel model)
        : index_(&index), model_(model) {}

    double score(std::string_view question, const Paragraph& paragraph) const override;
    std::string descriptor() const override;
    const BuiltinRankerModel& model() const noexcept { return model_; }

  private:
    const InvertedIndex* index_;
    BuiltinRankerModel model_;
};

struct TrainConfig {
    std::size_t epochs = 400;
    double learning_rate = 0.5;
    double l2 = 1e-4;
    double holdout_fraction = 0.2;
    std::uint64_t seed = 0;
    TruncationLimits limits;
};

struct TrainReport {
    std::size_t train_size = 0;
    std::size_t holdout_size = 0;
    double train_accuracy = 0.0;
    double holdout_accuracy = 0.0;
    double final_loss = 0.0;
};

struct TrainResult {
    BuiltinRankerModel model;
    TrainReport report;
};

/// Full-batch gradient descent on the logistic loss over standardized
/// features; the learned weights are folded back to raw feature space. When
/// `init` is given, training continues from it. A seeded shuffle holds out
/// `holdout_fraction` of the data for the accuracy report.
TrainResult train_builtin_ranker(std::span<const RankExample> dataset, const InvertedIndex& index,
                                 const TrainConfig& config,
                                 const BuiltinRankerModel* init = nullptr);

/// Heuristic span reader.
struct ReaderParams {
    std::size_t max_span_tokens = 30;
    std::size_t context_window = 15;
    double length_penalty = 0.1;
    /// Weight of a question term at distance d from the span: 1 / (1 + decay * (d - 1)).
    double proximity_decay = 0.1;
    /// Multiplier on the idf of question terms inside the span.
    double inside_penalty = 0.5;
    /// Bonus for spans that are a whole capitalized phrase or number matching
    /// the question's expected answer type.
    double type_bonus = 4.0;
    /// Bonus for spans bounded by punctuation or text edges on both sides.
    double clause_bonus = 0.3;
    /// Weight of question terms found in a different sentence than the span.
    double cross_sentence_weight = 0.3;
    /// A capitalized sentence-initial word counts as a name only when its idf
    /// is at least this fraction of the largest possible idf.
    double name_idf_fraction = 0.5;
};

/// Scores every token window of up to max_span_tokens tokens within one
/// sentence by idf-weighted question-term proximity inside a +/- context_window
/// token window, minus a length penalty, plus answer-type and clause-boundary
/// bonuses. Windows may not start or end on a stopword. Ties prefer the
/// earliest start.
class BuiltinReader final : public Reader {
  public:
    explicit BuiltinReader(const InvertedIndex& index, ReaderParams params = {})
        : index_(&index), params_(params) {}

    std::vector<SpanCandidate> spans(std::string_view question, const Paragraph& paragraph,
                                     std::size_t k) const override;
    std::string descriptor() const override { return "builtin-reader:v1"; }

  private:
    const InvertedIndex* index_;
    ReaderParams params_;
};

enum class AnswerType { Any, Person, Place, Entity, Year, Number };

/// Expected answer type from the question's wh-phrase.
AnswerType answer_type(std::string_view question);

}  // namespace mindstone
