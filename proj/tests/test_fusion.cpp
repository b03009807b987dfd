#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mindstone/errors.hpp"
#include "mindstone/fusion.hpp"
#include "mindstone/metrics.hpp"

using namespace mindstone;

namespace {

std::vector<SpanScores> random_spans(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> score(-5.0, 5.0);
    const std::vector<std::string> texts{"red", "green", "blue", "The Red", "cyan", "magenta"};
    std::vector<SpanScores> out;
    for (std::size_t i = 0; i < n; ++i) {
        SpanScores s;
        s.para_id = "p" + std::to_string(rng() % 7);
        s.start = rng() % 50;
        s.end = s.start + 3;
        s.text = texts[rng() % texts.size()];
        s.s_retriever = std::abs(score(rng)) + 0.1;
        s.s_ranker = score(rng);
        s.s_reader = score(rng);
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST(Normalize, ShiftExamples) {
    EXPECT_EQ(normalize_scores(std::vector<double>{3, 1, -2}), (std::vector<double>{1, -1, -4}));
    EXPECT_EQ(normalize_scores(std::vector<double>{-5}), (std::vector<double>{1}));
    EXPECT_TRUE(normalize_scores(std::vector<double>{}).empty());
}

TEST(Normalize, MaxIsOneAndOrderPreserved) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> s(1 + rng() % 20);
        for (auto& v : s) v = d(rng);
        const auto n = normalize_scores(s);
        EXPECT_EQ(*std::max_element(n.begin(), n.end()), 1.0);
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = 0; j < s.size(); ++j) {
                if (s[i] < s[j]) {
                    EXPECT_LE(n[i], n[j]);
                }
            }
        }
    }
}

TEST(Fuse, Examples) {
    EXPECT_EQ(fuse({0.3, -2.0, 0.7}, {1, 0, 0}), 0.3);
    EXPECT_DOUBLE_EQ(fuse({1, 1, 1}, {0.2, 0.3, 0.5}), 1.0);
    EXPECT_DOUBLE_EQ(fuse({0.2, 1, -1}, {0, 0.5, 0.5}), 0.0);
}

TEST(Fuse, MonotoneInEachComponent) {
    const FusionWeights w{0.2, 0.3, 0.5};
    EXPECT_LE(fuse({0, 0, 0}, w), fuse({0.5, 0, 0}, w));
    EXPECT_LE(fuse({0, 0, 0}, w), fuse({0, 0.5, 0}, w));
    EXPECT_LE(fuse({0, 0, 0}, w), fuse({0, 0, 0.5}, w));
}

TEST(Weights, Validation) {
    EXPECT_NO_THROW((FusionWeights{0.2, 0.4, 0.4}.validate()));
    EXPECT_THROW((FusionWeights{0.5, 0.5, 0.5}.validate()), InvalidArgument);
    EXPECT_THROW((FusionWeights{-0.1, 0.6, 0.5}.validate()), InvalidArgument);
}

TEST(FuseAnswers, SortedDedupedAndShiftInvariant) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> shift(-100.0, 100.0);
    for (int trial = 0; trial < 300; ++trial) {
        const auto spans = random_spans(rng, 1 + rng() % 12);
        const FusionWeights w{0.3, 0.3, 0.4};
        const auto base = fuse_answers(spans, w);
        std::set<std::string> seen;
        for (std::size_t i = 0; i < base.size(); ++i) {
            EXPECT_TRUE(seen.insert(normalize_answer(base[i].text)).second);
            if (i > 0) {
                EXPECT_GE(base[i - 1].fused, base[i].fused);
            }
        }
        const int stage = static_cast<int>(rng() % 3);
        auto shifted = spans;
        const double c = shift(rng);
        for (auto& s : shifted) (stage == 0 ? s.s_retriever : stage == 1 ? s.s_ranker : s.s_reader) += c;
        const auto moved = fuse_answers(shifted, w);
        ASSERT_EQ(moved.size(), base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            EXPECT_EQ(moved[i].text, base[i].text);
            EXPECT_EQ(moved[i].para_id, base[i].para_id);
            EXPECT_EQ(moved[i].start, base[i].start);
        }
    }
}

TEST(SimplexGrid, CountsAndSums) {
    EXPECT_EQ(simplex_grid(0.05).size(), 231u);
    EXPECT_EQ(simplex_grid(0.5).size(), 6u);
    for (const auto& w : simplex_grid(0.1)) {
        EXPECT_NEAR(w.w_retriever + w.w_ranker + w.w_reader, 1.0, 1e-9);
        EXPECT_NO_THROW(w.validate());
    }
    EXPECT_THROW(simplex_grid(0.0), InvalidArgument);
    EXPECT_THROW(simplex_grid(0.6), InvalidArgument);
}

TEST(TuneWeights, ReaderOnlySignalSelectsReaderCorner) {
    std::vector<TuneItem> dev;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> noise(0.0, 1.0);
    for (int q = 0; q < 30; ++q) {
        TuneItem item{{"gold"}, {}};
        // Retriever and ranker favour the wrong span; only the reader knows.
        item.spans.push_back({"p0", 0, 4, "gold", noise(rng), noise(rng), 5.0});
        item.spans.push_back({"p1", 0, 5, "wrong", 2.0 + noise(rng), 2.0 + noise(rng), 0.0});
        dev.push_back(item);
    }
    const auto r = tune_weights(dev, 0.05, 1);
    EXPECT_EQ(r.best, (FusionWeights{0, 0, 1}));
    EXPECT_EQ(r.best_em, 1.0);
    EXPECT_EQ(r.grid.size(), 231u);
}

TEST(TuneWeights, FullTieFallsBackToReader) {
    std::vector<TuneItem> dev{{{"x"}, {{"p", 0, 1, "x", 1.0, 1.0, 1.0}}}};
    const auto r = tune_weights_serial(dev, 0.05);
    EXPECT_EQ(r.best, (FusionWeights{0, 0, 1}));
}

TEST(TuneWeights, EmptyDevIsAnError) {
    EXPECT_THROW(tune_weights(std::vector<TuneItem>{}, 0.05, 2), InvalidArgument);
}

TEST(TuneWeights, ParallelEqualsSerial) {
    std::mt19937_64 rng(12);
    std::vector<TuneItem> dev;
    for (int q = 0; q < 40; ++q) dev.push_back({{"red"}, random_spans(rng, 6)});
    const auto a = tune_weights_serial(dev, 0.05);
    const auto b = tune_weights(dev, 0.05, 4);
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(a.best_em, b.best_em);
    ASSERT_EQ(a.grid.size(), b.grid.size());
    for (std::size_t i = 0; i < a.grid.size(); ++i) EXPECT_EQ(a.grid[i].em, b.grid[i].em);
}

TEST(TuneWeights, CsvHasHeaderAndOneRowPerPoint) {
    std::vector<TuneItem> dev{{{"x"}, {{"p", 0, 1, "x", 1.0, 1.0, 1.0}}}};
    const auto csv = tuning_csv(tune_weights_serial(dev, 0.5));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "w1,w2,w3,em");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
    EXPECT_NE(csv.find("0,0,1,1.000000\n"), std::string::npos) << csv;
}
