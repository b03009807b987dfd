#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "mindstone/eval.hpp"
#include "mindstone/run.hpp"
#include "test_support.hpp"

using namespace mindstone;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

nlohmann::json load(const std::filesystem::path& p) { return nlohmann::json::parse(test::slurp(p)); }

/// Paragraphs, an index and 20 dev questions from the F2 fixture.
class CliF2 : public ::testing::Test {
  protected:
    static void SetUpTestSuite() {
        dir_ = new test::TempDir();
        const auto f2 = test::fixture_dir() / "f2";
        ASSERT_EQ(run({"ingest", "--in", (f2 / "articles.jsonl").string(), "--out", paras()}).code, 0);
        ASSERT_EQ(run({"index", "--in", paras(), "--out", index()}).code, 0);
        auto records = read_questions(f2 / "dev_questions.jsonl").records;
        records.resize(20);
        write_questions(questions(), records);
    }
    static void TearDownTestSuite() { delete dir_; }

    static std::string paras() { return (*dir_ / "paras.jsonl").string(); }
    static std::string index() { return (*dir_ / "idx").string(); }
    static std::string questions() { return (*dir_ / "q.jsonl").string(); }
    static std::filesystem::path path(const std::string& name) { return *dir_ / name; }

    static test::TempDir* dir_;
};

test::TempDir* CliF2::dir_ = nullptr;

}  // namespace

TEST(Cli, HelpExitsZeroForEverySubcommand) {
    for (const auto* cmd : {"ingest", "index", "build-dataset", "train-ranker", "answer", "tune-weights", "eval",
                            "bench", "convert-squad"}) {
        const auto r = run({cmd, "--help"});
        EXPECT_EQ(r.code, 0) << cmd;
        EXPECT_NE(r.out.find("--"), std::string::npos) << cmd;
    }
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"--version"}).code, 0);
}

TEST(Cli, HelpDocumentsEveryConfigKey) {
    const auto help = run({"eval", "--help"}).out;
    const auto cfg = to_json(RunConfig{});
    for (const auto& [key, value] : cfg.items()) {
        if (value.is_object()) {
            for (const auto& [sub, unused] : value.items()) {
                EXPECT_NE(help.find(key + "." + sub), std::string::npos) << key << "." << sub;
            }
        } else {
            EXPECT_NE(help.find(key), std::string::npos) << key;
        }
    }
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"index", "--in", "/definitely/missing.jsonl", "--out", "x"}).code, 2);
    const auto r = run({"ingest", "--bogus"});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, RuntimeErrorsExitOne) {
    test::TempDir dir;
    test::spit(dir / "bad.jsonl", "{\"para_id\": 3}\n");
    const auto r = run({"index", "--in", (dir / "bad.jsonl").string(), "--out", (dir / "idx").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, IndexEchoesBm25ParamsInManifest) {
    test::TempDir dir;
    const auto in = (test::fixture_dir() / "f1" / "paragraphs.jsonl").string();
    ASSERT_EQ(run({"index", "--in", in, "--out", (dir / "a").string(), "--k1", "1.2", "--b", "0.75"}).code, 0);
    const auto m = load(dir / "a" / "manifest.json");
    EXPECT_EQ(m["params"]["k1"], 1.2);
    EXPECT_EQ(m["params"]["b"], 0.75);
    ASSERT_EQ(run({"index", "--in", in, "--out", (dir / "b").string()}).code, 0);
    const auto d = load(dir / "b" / "manifest.json");
    EXPECT_EQ(d["params"]["k1"], 0.9);
    EXPECT_EQ(d["params"]["b"], 0.4);
    EXPECT_EQ(run({"index", "--in", in, "--out", (dir / "c").string(), "--k1", "-1"}).code, 1);
}

TEST_F(CliF2, AnswerPrintsOneRecordPerQuestion) {
    const auto r = run({"answer", "--index", index(), "--ranker", "constant:0", "--question",
                        "Where was Haskos Fensel born?"});
    ASSERT_EQ(r.code, 0) << r.err;
    ASSERT_EQ(line_count(r.out), 1u);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["qid"], "0");
    EXPECT_TRUE(j.contains("answers"));

    test::spit(path("batch.jsonl"), "{\"qid\":\"a\",\"question\":\"Where was Haskos Fensel born?\"}\n"
                                    "{\"question\":\"Who was the rival of Rinlor Kelrin?\"}\n");
    const auto b = run({"answer", "--index", index(), "--ranker", "constant:0", "--batch", path("batch.jsonl").string()});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(line_count(b.out), 2u);
    EXPECT_EQ(run({"answer", "--index", index(), "--ranker", "constant:0"}).code, 2);
    EXPECT_EQ(run({"answer", "--index", index(), "--question", "x"}).code, 1) << "builtin ranker needs a model";
}

TEST_F(CliF2, EvalWritesReportAndCurves) {
    const auto out = path("eval");
    const auto r = run({"eval", "--index", index(), "--questions", questions(), "--out-dir", out.string(),
                        "--ranker", "constant:0", "--n-grid", "1,5,20,100"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = test::slurp(out / "curves.csv");
    EXPECT_EQ(line_count(csv), 5u);
    const auto rep = load(out / "report.json");
    EXPECT_EQ(rep["questions"], 20);
    EXPECT_EQ(rep["manifest_hash"].get<std::string>().size(), 16u);
    EXPECT_EQ(load(out / "run_manifest.json")["command"], "eval");
}

TEST_F(CliF2, ConfigPrecedenceIsFlagThenFileThenDefault) {
    test::spit(path("run.json"), R"({"n_retriever": 7, "ranker": "constant:0", "fusion": {"w_retriever": 0, "w_ranker": 0, "w_reader": 1}})");
    auto effective = [&](std::vector<std::string> extra) {
        const auto out = path("prec");
        std::vector<std::string> args{"eval", "--index", index(), "--questions", questions(), "--out-dir", out.string()};
        args.insert(args.end(), extra.begin(), extra.end());
        const auto r = run(args);
        EXPECT_EQ(r.code, 0) << r.err;
        return load(out / "run_manifest.json")["config"];
    };
    const auto def = to_json(RunConfig{});
    const auto file = effective({"--config", path("run.json").string()});
    EXPECT_EQ(file["n_retriever"], 7);
    EXPECT_EQ(file["fusion"]["w_reader"], 1.0);
    EXPECT_EQ(file["read_fraction"], def["read_fraction"]);
    const auto flag = effective({"--config", path("run.json").string(), "--n-retriever", "9"});
    EXPECT_EQ(flag["n_retriever"], 9);
    EXPECT_EQ(flag["fusion"]["w_reader"], 1.0);
    const auto none = effective({"--ranker", "constant:0"});
    EXPECT_EQ(none["n_retriever"], def["n_retriever"]);
}

TEST_F(CliF2, TuneWeightsWritesGridFiles) {
    const auto out = path("tune");
    const auto r = run({"tune-weights", "--index", index(), "--questions", questions(), "--out-dir", out.string(),
                        "--ranker", "constant:0", "--grid-step", "0.25", "--write-config", path("tuned.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto w = load(out / "weights.json");
    EXPECT_EQ(w["grid_points"], 15);
    EXPECT_EQ(line_count(test::slurp(out / "tuning.csv")), 16u);
    const auto tuned = load(path("tuned.json"));
    EXPECT_EQ(tuned["fusion"]["w_reader"], w["best"]["w_reader"]);
}

TEST_F(CliF2, DatasetTrainingAndBench) {
    const auto ds = path("aug1.jsonl").string();
    ASSERT_EQ(run({"build-dataset", "--method", "aug1", "--index", index(), "--questions", questions(), "--out", ds})
                  .code,
              0);
    EXPECT_EQ(line_count(test::slurp(ds)), 20u * 5u);
    const auto model = path("model.json").string();
    const auto t = run({"train-ranker", "--index", index(), "--dataset", ds, "--out", model, "--epochs", "20"});
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_EQ(run({"train-ranker", "--index", index(), "--out", model}).code, 2);
    const auto b = run({"bench", "--index", index(), "--questions", questions(), "--out-dir", path("bench").string(),
                        "--ranker-model", model, "--bench-runs", "2", "--bench-queries", "5"});
    ASSERT_EQ(b.code, 0) << b.err;
    const auto lat = load(path("bench") / "latency.json");
    EXPECT_EQ(lat["per_run_mean_ms"].size(), 2u);
}

TEST(Cli, ConvertSquad) {
    test::TempDir dir;
    test::spit(dir / "squad.json", R"({"data":[{"title":"T","paragraphs":[{"context":"Alpha beta.","qas":[{"id":"1","question":"What?","answers":[{"text":"beta","answer_start":6}]}]}]}]})");
    const auto r = run({"convert-squad", "--in", (dir / "squad.json").string(), "--articles-out",
                        (dir / "a.jsonl").string(), "--questions-out", (dir / "q.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_questions(dir / "q.jsonl").records.size(), 1u);
    test::spit(dir / "broken.json", "{not json");
    EXPECT_EQ(run({"convert-squad", "--in", (dir / "broken.json").string(), "--articles-out", "x", "--questions-out",
                   "y"})
                  .code,
              1);
}
