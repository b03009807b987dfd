#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mindstone {

/// Convex combination weights of the three stage scores.
struct FusionWeights {
    double w_retriever = 0.2;
    double w_ranker = 0.4;
    double w_reader = 0.4;

    void validate() const;
    friend bool operator==(const FusionWeights&, const FusionWeights&) = default;
};

struct NormalizedScores {
    double retriever = 0.0;
    double ranker = 0.0;
    double reader = 0.0;
};

/// s_i -> s_i - max(s) + 1. Maps into (-inf, 1] with max exactly 1.
std::vector<double> normalize_scores(std::span<const double> scores);

double fuse(const NormalizedScores& n, const FusionWeights& w) noexcept;

/// A read span with its raw per-stage scores.
struct SpanScores {
    std::string para_id;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string text;
    double s_retriever = 0.0;
    double s_ranker = 0.0;
    double s_reader = 0.0;
};

struct RankedAnswer {
    std::string text;
    std::string para_id;
    std::size_t start = 0;
    std::size_t end = 0;
    double s_retriever = 0.0;
    double s_ranker = 0.0;
    double s_reader = 0.0;
    double fused = 0.0;
};

/// Normalizes each stage over `spans`, fuses, sorts by fused descending (ties
/// by para_id, then start) and keeps the best-scoring span per normalized
/// answer text.
std::vector<RankedAnswer> fuse_answers(std::span<const SpanScores> spans, const FusionWeights& w);

/// Cached stage output of one dev question.
struct TuneItem {
    std::vector<std::string> golds;
    std::vector<SpanScores> spans;
};

struct GridPoint {
    FusionWeights weights;
    double em = 0.0;
};

struct TuneResult {
    FusionWeights best;
    double best_em = 0.0;
    std::vector<GridPoint> grid;  // in enumeration order
};

/// Lattice points of the weight simplex at resolution `step` (1/step must be
/// an integer). Enumerated by w_retriever, then w_ranker, ascending.
std::vector<FusionWeights> simplex_grid(double step);

/// Exhaustive simplex search maximizing top-1 EM. Ties prefer larger
/// w_reader, then larger w_ranker. Grid points are evaluated on `workers`
/// threads; the result equals tune_weights_serial.
TuneResult tune_weights(std::span<const TuneItem> dev, double step, std::size_t workers);
TuneResult tune_weights_serial(std::span<const TuneItem> dev, double step);

/// One `w1,w2,w3,em` row per grid point, with a header line.
std::string tuning_csv(const TuneResult& result);

}  // namespace mindstone
