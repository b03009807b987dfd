#include <gtest/gtest.h>

#include "mindstone/errors.hpp"
#include "mindstone/parallel.hpp"
#include "mindstone/run.hpp"
#include "test_support.hpp"

using namespace mindstone;

TEST(RunConfig, JsonRoundTrip) {
    RunConfig cfg;
    cfg.pipeline.n_retriever = 20;
    cfg.pipeline.n_reader = 4;
    cfg.pipeline.rm3.enabled = true;
    cfg.pipeline.rm3.alpha = 0.3;
    cfg.pipeline.weights = {0.1, 0.2, 0.7};
    cfg.ranker = "constant:0.5";
    cfg.n_grid = {1, 3};
    cfg.workers = 3;
    const auto back = run_config_from_json(nlohmann::json::parse(to_json(cfg).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(cfg).dump());
    EXPECT_EQ(back.pipeline.n_reader.value(), 4u);
    EXPECT_EQ(back.pipeline.weights, (FusionWeights{0.1, 0.2, 0.7}));
}

TEST(RunConfig, MissingKeysKeepBaseAndUnknownKeysFail) {
    RunConfig base;
    base.pipeline.n_retriever = 42;
    const auto cfg = run_config_from_json(nlohmann::json::parse(R"({"fusion":{"w_retriever":0,"w_ranker":0,"w_reader":1}})"), base);
    EXPECT_EQ(cfg.pipeline.n_retriever, 42u);
    EXPECT_EQ(cfg.pipeline.weights.w_reader, 1.0);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"n_retrevier": 3})")), FormatError);
    EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"rm3": {"beta": 1}})")), FormatError);
    const auto bad = run_config_from_json(nlohmann::json::parse(R"({"fusion":{"w_retriever":1,"w_ranker":1,"w_reader":1}})"));
    EXPECT_THROW(bad.pipeline.validate(), InvalidArgument);
}

TEST(Scorers, SelectorsBuildTheRightScorers) {
    const auto idx = test::f1_index();
    const AnswerKey key{{"q", {"cat"}}};
    EXPECT_EQ(make_ranker("constant:-1.5", "", idx, nullptr, 1)->score("q", idx.paragraph(0)), -1.5);
    EXPECT_EQ(make_ranker("oracle", "", idx, &key, 1)->descriptor(), "oracle");
    EXPECT_THROW(make_ranker("oracle", "", idx, nullptr, 1), InvalidArgument);
    EXPECT_THROW(make_ranker("builtin", "", idx, nullptr, 1), InvalidArgument);
    EXPECT_THROW(make_ranker("constant:abc", "", idx, nullptr, 1), InvalidArgument);
    EXPECT_THROW(make_ranker("nonsense", "", idx, nullptr, 1), InvalidArgument);
    EXPECT_EQ(make_reader("builtin", idx, nullptr, 1)->descriptor(), "builtin-reader:v1");
    EXPECT_THROW(make_reader("nonsense", idx, nullptr, 1), InvalidArgument);
    const auto ext = make_ranker("external:" + test::echo_scorer("--score 2"), "", idx, nullptr, 1);
    EXPECT_EQ(ext->score("q", idx.paragraph(0)), 2.0);
}

TEST(RunManifest, HashIgnoresWorkersAndTimestamp) {
    test::TempDir dir;
    const auto idx = test::f1_index();
    idx.save(dir / "idx");
    RunConfig cfg;
    cfg.ranker = "constant:0";
    const auto scorers = make_scorers(cfg, idx, nullptr);
    auto a = make_run_manifest("eval", cfg, dir / "idx", idx, scorers);
    cfg.workers = 7;
    auto b = make_run_manifest("eval", cfg, dir / "idx", idx, scorers);
    b.timestamp = "2000-01-01T00:00:00Z";
    EXPECT_EQ(a.hash(), b.hash());
    cfg.pipeline.n_retriever = 5;
    const auto c = make_run_manifest("eval", cfg, dir / "idx", idx, scorers);
    EXPECT_NE(a.hash(), c.hash());
    EXPECT_EQ(a.index_checksum, idx.checksum());
    EXPECT_EQ(a.ranker, "constant:0");
    const auto j = a.to_json();
    EXPECT_EQ(j["tool_version"], kToolVersion);
    EXPECT_TRUE(j.contains("timestamp"));
}

TEST(Parallel, PreservesOrderAndRethrowsLowestIndex) {
    std::vector<int> out(100, -1);
    parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 17 || i == 33) throw std::runtime_error(std::to_string(i));
        });
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "17");
    }
    EXPECT_EQ(resolve_workers(0), default_workers());
    EXPECT_EQ(resolve_workers(3), 3u);
}
