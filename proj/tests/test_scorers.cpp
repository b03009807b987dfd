#include <gtest/gtest.h>

#include <random>

#include "mindstone/builtin.hpp"
#include "mindstone/datasets.hpp"
#include "mindstone/errors.hpp"
#include "mindstone/eval.hpp"
#include "mindstone/metrics.hpp"
#include "test_support.hpp"

using namespace mindstone;

namespace {

/// Ranker that scores the paragraph's full length in characters.
class LengthRanker final : public Ranker {
  public:
    double score(std::string_view, const Paragraph& p) const override {
        return static_cast<double>(p.full_text.size());
    }
    std::string descriptor() const override { return "length"; }
};

/// Reader that returns whatever spans it was constructed with.
class FixedReader final : public Reader {
  public:
    explicit FixedReader(std::vector<SpanCandidate> spans) : spans_(std::move(spans)) {}
    std::vector<SpanCandidate> spans(std::string_view, const Paragraph&, std::size_t) const override {
        return spans_;
    }
    std::string descriptor() const override { return "fixed"; }

  private:
    std::vector<SpanCandidate> spans_;
};

struct F2 {
    std::vector<Paragraph> paragraphs;
    InvertedIndex index;
    std::vector<GoldRecord> train;
    std::vector<GoldRecord> dev;
};

const F2& f2() {
    static const F2 data = [] {
        std::vector<Paragraph> ps;
        for (const auto& a : read_articles(test::fixture_dir() / "f2" / "articles.jsonl")) {
            for (auto& p : split_article(a)) ps.push_back(std::move(p));
        }
        auto idx = InvertedIndex::build(ps, {}, Stopwords::english());
        return F2{ps, std::move(idx),
                  read_questions(test::fixture_dir() / "f2" / "train_questions.jsonl").records,
                  read_questions(test::fixture_dir() / "f2" / "dev_questions.jsonl").records};
    }();
    return data;
}

std::vector<RankExample> marker_dataset(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::vector<std::string> words{"stone", "river", "lamp", "cloud", "field", "road"};
    std::vector<RankExample> out;
    for (std::size_t i = 0; i < count; ++i) {
        std::string text;
        for (int w = 0; w < 6; ++w) text += words[rng() % words.size()] + " ";
        const int label = static_cast<int>(i % 2);
        if (label) text += "zephyr zephyr";
        out.push_back({"where is the zephyr", "p" + std::to_string(i), text, label});
    }
    return out;
}

InvertedIndex index_for(const std::vector<RankExample>& data) {
    std::vector<std::string> bodies;
    for (const auto& e : data) bodies.push_back(e.text);
    return test::index_of(bodies, Stopwords::english());
}

}  // namespace

TEST(Truncation, RankerSeesOnlyTheFirstTokens) {
    const LengthRanker ranker;
    TruncationLimits limits;
    limits.ranker_para_tokens = 3;
    const auto a = Paragraph::with_id("a", "a", "", "one two three four five", 0);
    const auto b = Paragraph::with_id("b", "b", "", "one two three different tail entirely", 0);
    EXPECT_EQ(rank(ranker, "q", a, limits), rank(ranker, "q", b, limits));
    EXPECT_EQ(rank(ranker, "q", a, limits), std::string("one two three").size());
}

TEST(Truncation, TitleCountsTowardsTheBudget) {
    const auto p = Paragraph::make("a", "Big Title", "body words here", 0);
    const auto cut = truncate_paragraph(p, 3);
    EXPECT_EQ(cut.full_text, "Big Title\nbody");
    EXPECT_EQ(cut.body, "body");
    EXPECT_EQ(truncate_paragraph(p, 1).full_text, "Big");
}

TEST(Read, SpansStayInsideTruncatedText) {
    TruncationLimits limits;
    limits.reader_total_tokens = 6;
    const auto p = Paragraph::with_id("p", "p", "", "w1 w2 w3 w4 w5 w6 w7 w8", 0);
    const FixedReader inside({{0, 2, 1.0}});
    EXPECT_EQ(read(inside, "q1 q2", p, 1, limits).front().text, "w1");
    // "q1 q2" leaves 4 paragraph tokens: "w1 w2 w3 w4" is 11 bytes.
    const FixedReader outside({{12, 14, 1.0}});
    EXPECT_THROW(read(outside, "q1 q2", p, 1, limits), StageError);
    const FixedReader none({});
    EXPECT_THROW(read(none, "q1 q2", p, 1, limits), StageError);
    EXPECT_THROW(read(inside, "q", p, 0, limits), InvalidArgument);
}

TEST(Read, SortedByScoreThenStartAndCappedAtK) {
    const auto p = Paragraph::with_id("p", "p", "", "alpha beta gamma delta", 0);
    const FixedReader reader({{6, 10, 0.5}, {11, 16, 2.0}, {0, 5, 0.5}});
    const auto spans = read(reader, "q", p, 2, {});
    ASSERT_EQ(spans.size(), 2u);
    EXPECT_EQ(spans[0].text, "gamma");
    EXPECT_EQ(spans[1].text, "alpha");
    for (const auto& s : spans) EXPECT_EQ(s.text, p.full_text.substr(s.start_char, s.end_char - s.start_char));
}

TEST(Oracle, RankerSignFollowsContainment) {
    const OracleRanker ranker(AnswerKey{{"who?", {"Ada Lovelace"}}});
    const auto yes = Paragraph::with_id("p", "p", "", "Notes by ada lovelace survive.", 0);
    const auto no = Paragraph::with_id("q", "q", "", "Nothing here.", 0);
    EXPECT_EQ(ranker.score("who?", yes), 1.0);
    EXPECT_EQ(ranker.score("who?", no), -1.0);
    EXPECT_EQ(ranker.score("unknown question", yes), -1.0);
}

TEST(Oracle, ReaderFindsGoldSpan) {
    const OracleReader reader(AnswerKey{{"who?", {"Ada Lovelace"}}});
    const auto p = Paragraph::make("a", "Notes", "Written by Ada Lovelace in 1843.", 0);
    const auto spans = read(reader, "who?", p, 1, {});
    ASSERT_EQ(spans.size(), 1u);
    EXPECT_EQ(spans[0].text, "Ada Lovelace");
}

TEST(BuiltinRanker, ZeroModelScoresZero) {
    const auto idx = test::f1_index();
    const BuiltinRanker ranker(idx, BuiltinRankerModel{});
    for (std::size_t d = 0; d < 5; ++d) EXPECT_EQ(ranker.score("cat", idx.paragraph(d)), 0.0);
}

TEST(BuiltinRanker, FeaturesOnHandCase) {
    const auto idx = test::index_of({"cat sat", "dog ran", "cat dog"});
    const auto p = Paragraph::make("t", "Cat", "dog ran far", 0);
    const auto f = ranker_features(idx, "cat dog bird", p);
    EXPECT_DOUBLE_EQ(f[1], 2.0);
    EXPECT_DOUBLE_EQ(f[2], idx.idf("cat") + idx.idf("dog"));
    EXPECT_DOUBLE_EQ(f[3], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(f[4], std::log(1.0 + 4.0));
    EXPECT_DOUBLE_EQ(f[5], 1.0);
}

TEST(BuiltinRanker, ModelSaveLoadRoundTrip) {
    test::TempDir dir;
    BuiltinRankerModel m;
    m.weights = {0.5, -1.25, 2.0, 0.125, -3.0, 1e-9};
    m.bias = -0.75;
    m.save(dir / "m.json");
    const auto back = BuiltinRankerModel::load(dir / "m.json");
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.bias, m.bias);
    test::spit(dir / "bad.json", "{\"feature_spec_version\": 9, \"weights\": [], \"bias\": 0}");
    EXPECT_THROW(BuiltinRankerModel::load(dir / "bad.json"), FormatError);
}

TEST(TrainRanker, SeparableDataReachesFullHoldoutAccuracy) {
    const auto data = marker_dataset(80, 1);
    const auto idx = index_for(data);
    const auto result = train_builtin_ranker(data, idx, {});
    EXPECT_EQ(result.report.holdout_accuracy, 1.0);
    EXPECT_GT(result.report.holdout_size, 0u);
}

TEST(TrainRanker, RejectsEmptyAndSingleLabelData) {
    const auto idx = test::index_of({"x"});
    EXPECT_THROW(train_builtin_ranker({}, idx, {}), InvalidArgument);
    std::vector<RankExample> ones{{"q", "a", "x", 1}, {"q", "b", "x", 1}};
    EXPECT_THROW(train_builtin_ranker(ones, idx, {}), InvalidArgument);
}

TEST(TrainRanker, ReproducibleForFixedSeed) {
    const auto data = marker_dataset(60, 2);
    const auto idx = index_for(data);
    TrainConfig cfg;
    cfg.seed = 9;
    const auto a = train_builtin_ranker(data, idx, cfg);
    const auto b = train_builtin_ranker(data, idx, cfg);
    EXPECT_EQ(a.model.weights, b.model.weights);
    EXPECT_EQ(a.model.bias, b.model.bias);
}

TEST(TrainRanker, ShuffledLabelsGiveChanceAccuracy) {
    const auto& d = f2();
    auto data = build_dataset_aug1(to_qa_pairs(d.train, d.index), d.index, 5);
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed + 100);
        std::vector<int> labels;
        for (const auto& e : data) labels.push_back(e.label);
        std::shuffle(labels.begin(), labels.end(), rng);
        auto shuffled = data;
        for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].label = labels[i];
        // Balance the classes so chance level is 0.5.
        std::vector<RankExample> balanced;
        std::size_t pos = 0, neg = 0;
        for (const auto& e : shuffled) pos += e.label;
        neg = shuffled.size() - pos;
        std::size_t keep_neg = pos, kept_neg = 0;
        for (const auto& e : shuffled) {
            if (e.label == 1 || kept_neg++ < keep_neg) balanced.push_back(e);
        }
        ASSERT_GT(neg, pos);
        TrainConfig cfg;
        cfg.seed = seed;
        sum += train_builtin_ranker(balanced, d.index, cfg).report.holdout_accuracy;
    }
    EXPECT_NEAR(sum / 5.0, 0.5, 0.1);
}

TEST(TrainRanker, FixtureHoldoutSignAgreement) {
    const auto& d = f2();
    const auto train_pairs = to_qa_pairs(d.train, d.index);
    const auto data = build_dataset_finetune(train_pairs, d.index, 0);
    const auto model = train_builtin_ranker(data, d.index, {}).model;
    const BuiltinRanker ranker(d.index, model);
    const auto held = build_dataset_finetune(to_qa_pairs(d.dev, d.index), d.index, 0);
    std::size_t agree = 0;
    for (const auto& e : held) {
        const double s = rank(ranker, e.question, d.index.paragraph(e.para_id), {});
        agree += (s > 0) == (e.label == 1);
    }
    EXPECT_GE(static_cast<double>(agree) / held.size(), 0.8);
}

TEST(BuiltinReader, VerbatimAnswerParagraphIsTheTopSpan) {
    const auto idx = test::index_of({"Marie Curie", "other words here"});
    const BuiltinReader reader(idx);
    const auto p = Paragraph::with_id("x", "x", "", "Marie Curie", 0);
    const auto spans = read(reader, "Who discovered polonium?", p, 1, {});
    ASSERT_EQ(spans.size(), 1u);
    EXPECT_EQ(spans[0].text, "Marie Curie");
}

TEST(BuiltinReader, AlwaysAnswersWithKSpansOrFewer) {
    const auto idx = test::f1_index();
    const BuiltinReader reader(idx);
    for (std::size_t d = 0; d < idx.doc_count(); ++d) {
        EXPECT_EQ(read(reader, "What did the cat chase?", idx.paragraph(d), 1, {}).size(), 1u);
        const auto three = read(reader, "What did the cat chase?", idx.paragraph(d), 3, {});
        EXPECT_GE(three.size(), 1u);
        EXPECT_LE(three.size(), 3u);
    }
    const auto only_stop = Paragraph::with_id("s", "s", "", "the of and", 0);
    EXPECT_EQ(read(reader, "what?", only_stop, 1, {}).size(), 1u);
}

TEST(BuiltinReader, AnswerTypes) {
    EXPECT_EQ(answer_type("Who founded the mill?"), AnswerType::Person);
    EXPECT_EQ(answer_type("Where was she born?"), AnswerType::Place);
    EXPECT_EQ(answer_type("In which city did he die?"), AnswerType::Place);
    EXPECT_EQ(answer_type("When was it built?"), AnswerType::Year);
    EXPECT_EQ(answer_type("In what year did it open?"), AnswerType::Year);
    EXPECT_EQ(answer_type("How many bridges did he build?"), AnswerType::Number);
    EXPECT_EQ(answer_type("Which company bought it?"), AnswerType::Entity);
    EXPECT_EQ(answer_type("Why did it close?"), AnswerType::Any);
}

TEST(BuiltinReader, FixtureGoldParagraphSpanF1) {
    const auto& d = f2();
    const BuiltinReader reader(d.index);
    const auto pairs = to_qa_pairs(d.dev, d.index);
    std::size_t good = 0, total = 0;
    for (const auto& pair : pairs) {
        if (!pair.gold_para_id) continue;
        ++total;
        const auto spans = read(reader, pair.question, d.index.paragraph(*pair.gold_para_id), 1, {});
        good += f1_score(spans.front().text, pair.answers) >= 0.5;
    }
    ASSERT_EQ(total, d.dev.size());
    EXPECT_GE(static_cast<double>(good) / total, 0.7);
}
