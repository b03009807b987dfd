#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mindstone/builtin.hpp"
#include "mindstone/config.hpp"
#include "mindstone/corpus.hpp"
#include "mindstone/datasets.hpp"
#include "mindstone/errors.hpp"
#include "mindstone/eval.hpp"
#include "mindstone/fusion.hpp"
#include "mindstone/index.hpp"
#include "mindstone/jsonl.hpp"
#include "mindstone/parallel.hpp"
#include "mindstone/pipeline.hpp"
#include "mindstone/run.hpp"

namespace mindstone::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::shared_ptr<spdlog::logger> logger() {
    static auto log = [] {
        auto l = spdlog::stderr_color_mt("mindstone");
        l->set_pattern("[%l] %v");
        auto level = spdlog::level::warn;
        if (const char* env = std::getenv("MINDSTONE_LOG"); env && *env) {
            level = spdlog::level::from_str(to_lower_ascii(env));
        }
        l->set_level(level);
        return l;
    }();
    return log;
}

/// Run config flags shared by every subcommand that builds a pipeline. A flag
/// only overrides the config file (or default) when given.
class ConfigFlags {
  public:
    void attach(CLI::App& app) {
        app.add_option("--config", config_path_, "Run config JSON file")->check(CLI::ExistingFile);
        bind<std::size_t>(app, "--n-retriever", "n_retriever: paragraphs retrieved per question",
                          [](RunConfig& c, std::size_t v) { c.pipeline.n_retriever = v; });
        bind<double>(app, "--read-fraction", "read_fraction: share of ranked candidates read",
                     [](RunConfig& c, double v) { c.pipeline.read_fraction = v; });
        bind<std::size_t>(app, "--n-reader", "n_reader: explicit reader cutoff (overrides read_fraction)",
                          [](RunConfig& c, std::size_t v) { c.pipeline.n_reader = v; });
        bind<bool>(app, "--rm3", "rm3.enabled: neural RM3 expansion (true|false)",
                   [](RunConfig& c, bool v) { c.pipeline.rm3.enabled = v; });
        bind<double>(app, "--rm3-alpha", "rm3.alpha: weight of the original query",
                     [](RunConfig& c, double v) { c.pipeline.rm3.alpha = v; });
        bind<std::size_t>(app, "--rm3-terms", "rm3.terms: top TF-IDF terms per feedback document",
                          [](RunConfig& c, std::size_t v) { c.pipeline.rm3.terms = v; });
        bind<std::size_t>(app, "--rm3-second-pass-n", "rm3.second_pass_n: second retrieval depth (0: n_retriever)",
                          [](RunConfig& c, std::size_t v) { c.pipeline.rm3.second_pass_n = v; });
        bind<bool>(app, "--rm3-rescore-original",
                   "rm3.rescore_original: BM25 of the original question for RM3-only candidates",
                   [](RunConfig& c, bool v) { c.pipeline.rm3_rescore_original = v; });
        bind<double>(app, "--w-retriever", "fusion.w_retriever",
                     [](RunConfig& c, double v) { c.pipeline.weights.w_retriever = v; });
        bind<double>(app, "--w-ranker", "fusion.w_ranker",
                     [](RunConfig& c, double v) { c.pipeline.weights.w_ranker = v; });
        bind<double>(app, "--w-reader", "fusion.w_reader",
                     [](RunConfig& c, double v) { c.pipeline.weights.w_reader = v; });
        bind<std::size_t>(app, "--k-spans", "k_spans_per_paragraph: spans kept per read paragraph",
                          [](RunConfig& c, std::size_t v) { c.pipeline.k_spans_per_paragraph = v; });
        bind<std::size_t>(app, "--ranker-para-tokens", "limits.ranker_para_tokens",
                          [](RunConfig& c, std::size_t v) { c.pipeline.limits.ranker_para_tokens = v; });
        bind<std::size_t>(app, "--reader-total-tokens", "limits.reader_total_tokens",
                          [](RunConfig& c, std::size_t v) { c.pipeline.limits.reader_total_tokens = v; });
        bind<std::string>(app, "--ranker", "ranker: builtin | oracle | constant:<v> | external:<cmd>",
                          [](RunConfig& c, const std::string& v) { c.ranker = v; });
        bind<std::string>(app, "--ranker-model", "ranker_model: builtin ranker model file",
                          [](RunConfig& c, const std::string& v) { c.ranker_model = v; });
        bind<std::string>(app, "--reader", "reader: builtin | oracle | external:<cmd>",
                          [](RunConfig& c, const std::string& v) { c.reader = v; });
        bind<std::size_t>(app, "--scorer-pool-size", "scorer_pool_size: processes per external scorer",
                          [](RunConfig& c, std::size_t v) { c.scorer_pool_size = v; });
        bind<double>(app, "--strict-tau", "eval.strict_tau: Jaccard threshold of strict recall",
                     [](RunConfig& c, double v) { c.strict_tau = v; });
        auto grid = std::make_shared<std::vector<std::size_t>>();
        auto* g = app.add_option("--n-grid", *grid, "eval.n_grid: comma-separated cutoffs")->delimiter(',');
        setters_.push_back({g, [grid](RunConfig& c) { c.n_grid = *grid; }});
        bind<double>(app, "--grid-step", "eval.grid_step: fusion weight grid resolution",
                     [](RunConfig& c, double v) { c.grid_step = v; });
        bind<std::size_t>(app, "--bench-runs", "bench.runs: timed passes",
                          [](RunConfig& c, std::size_t v) { c.bench_runs = v; });
        bind<std::size_t>(app, "--bench-queries", "bench.queries_per_run: questions per pass",
                          [](RunConfig& c, std::size_t v) { c.bench_queries = v; });
        bind<std::uint64_t>(app, "--seed", "seed: randomness seed",
                            [](RunConfig& c, std::uint64_t v) { c.seed = v; });
        bind<std::size_t>(app, "--workers", "workers: threads (0: all cores)",
                          [](RunConfig& c, std::size_t v) { c.workers = v; });
    }

    /// Defaults, then the config file, then explicit flags.
    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path_.empty()) cfg = load_run_config(config_path_, cfg);
        for (const auto& [opt, set] : setters_) {
            if (opt->count() > 0) set(cfg);
        }
        cfg.pipeline.validate();
        if (cfg.n_grid.empty()) throw InvalidArgument("n_grid must not be empty");
        return cfg;
    }

  private:
    template <typename T, typename Fn>
    void bind(CLI::App& app, const std::string& name, const std::string& desc, Fn fn) {
        auto holder = std::make_shared<T>();
        auto* opt = app.add_option(name, *holder, desc);
        setters_.push_back({opt, [holder, fn](RunConfig& c) { fn(c, *holder); }});
    }

    std::string config_path_;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters_;
};

void write_text(const fs::path& path, const std::string& text) {
    auto out = jsonl::open_out(path);
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

std::string dump_line(const ojson& j) { return j.dump(-1, ' ', false, ojson::error_handler_t::replace); }

/// Index, gold answers and scorers for commands that run the pipeline.
struct Session {
    RunConfig cfg;
    fs::path index_dir;
    InvertedIndex index;
    std::optional<AnswerKey> key;
    ScorerSet scorers;

    Session(RunConfig c, fs::path dir, const std::string& gold_path)
        : cfg(std::move(c)), index_dir(std::move(dir)), index(InvertedIndex::load(index_dir)) {
        cfg.workers = resolve_workers(cfg.workers);
        if (!gold_path.empty()) key = answer_key(read_questions(gold_path).records);
        scorers = make_scorers(cfg, index, key ? &*key : nullptr);
        logger()->info("index {}: {} paragraphs; ranker {}; reader {}; workers {}", index_dir.string(),
                       index.doc_count(), scorers.ranker->descriptor(), scorers.reader->descriptor(),
                       cfg.workers);
    }

    Pipeline pipeline() const {
        return Pipeline(index, *scorers.ranker, *scorers.reader, cfg.pipeline, cfg.workers);
    }

    RunManifest manifest(std::string command) const {
        return make_run_manifest(std::move(command), cfg, index_dir, index, scorers);
    }
};

struct BatchQuestion {
    std::string qid;
    std::string question;
};

/// Questions for `answer --batch`: JSONL with "question" and optional "qid".
std::vector<BatchQuestion> read_batch(const fs::path& path) {
    std::vector<BatchQuestion> out;
    jsonl::for_each(path, [&](const nlohmann::json& j, std::size_t lineno) {
        const auto where = path.string() + ":" + std::to_string(lineno);
        BatchQuestion q;
        q.question = jsonl::require_string(j, "question", where);
        auto it = j.find("qid");
        q.qid = (it != j.end() && it->is_string()) ? it->get<std::string>() : std::to_string(out.size());
        out.push_back(std::move(q));
    });
    return out;
}

std::vector<std::string> question_texts(const std::vector<GoldRecord>& records) {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.question);
    return out;
}

ojson weights_json(const FusionWeights& w) {
    return {{"w_retriever", w.w_retriever}, {"w_ranker", w.w_ranker}, {"w_reader", w.w_reader}};
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Open-domain question answering cascade: retrieve, rank, expand, read, fuse.", "mindstone"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.set_version_flag("--version", kToolVersion);

    std::function<int()> action;
    std::string in, out_path, index_dir, questions, gold;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Split articles JSONL into paragraphs JSONL");
    ingest->add_option("--in", in, "Articles JSONL")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", out_path, "Paragraphs JSONL to write")->required();
    ingest->callback([&] {
        action = [&] {
            std::vector<Paragraph> paras;
            for (const auto& a : read_articles(in)) {
                auto split = split_article(a);
                paras.insert(paras.end(), std::make_move_iterator(split.begin()),
                             std::make_move_iterator(split.end()));
            }
            write_paragraphs(out_path, paras);
            out << dump_line({{"paragraphs", paras.size()}, {"out", out_path}}) << "\n";
            return 0;
        };
    });

    // index
    Bm25Params bm25;
    std::string stopwords = "english";
    auto* index = app.add_subcommand("index", "Build a BM25 index directory from paragraphs JSONL");
    index->add_option("--in", in, "Paragraphs JSONL")->required()->check(CLI::ExistingFile);
    index->add_option("--out", out_path, "Index directory")->required();
    index->add_option("--k1", bm25.k1, "BM25 k1")->capture_default_str();
    index->add_option("--b", bm25.b, "BM25 b")->capture_default_str();
    index->add_option("--stopwords", stopwords, "english | none | <file, one term per line>")
        ->capture_default_str();
    index->callback([&] {
        action = [&] {
            Stopwords stop = stopwords == "english" ? Stopwords::english()
                             : stopwords == "none"  ? Stopwords::none()
                                                    : Stopwords::load(stopwords);
            auto idx = InvertedIndex::build(read_paragraphs(in), bm25, std::move(stop));
            idx.save(out_path);
            out << dump_line({{"doc_count", idx.doc_count()},
                              {"vocabulary_size", idx.vocabulary_size()},
                              {"checksum", idx.checksum()}})
                << "\n";
            return 0;
        };
    });

    // build-dataset
    std::string method;
    std::size_t m = kAugRetrieveDepth, n = kAugKeep;
    std::uint64_t seed = 0;
    std::string ranker_sel = "builtin", ranker_model;
    auto* dataset = app.add_subcommand("build-dataset", "Build a ranker training dataset");
    dataset->add_option("--method", method, "finetune | aug1 | aug2")
        ->required()
        ->check(CLI::IsMember({"finetune", "aug1", "aug2"}));
    dataset->add_option("--index", index_dir, "Index directory")->required()->check(CLI::ExistingDirectory);
    dataset->add_option("--questions", questions, "Questions JSONL")->required()->check(CLI::ExistingFile);
    dataset->add_option("--out", out_path, "Dataset JSONL to write")->required();
    dataset->add_option("--seed", seed, "Negative sampling seed (finetune)")->capture_default_str();
    dataset->add_option("--m", m, "Retrieval depth (aug2)")->capture_default_str();
    dataset->add_option("--n", n, "Paragraphs kept per question (aug1, aug2)")->capture_default_str();
    dataset->add_option("--ranker", ranker_sel, "Ranker for aug2: builtin | oracle | constant:<v> | external:<cmd>")
        ->capture_default_str();
    dataset->add_option("--ranker-model", ranker_model, "Builtin ranker model (aug2)");
    dataset->callback([&] {
        action = [&] {
            const auto idx = InvertedIndex::load(index_dir);
            const auto file = read_questions(questions);
            const auto pairs = to_qa_pairs(file.records, idx);
            std::vector<RankExample> data;
            if (method == "finetune") {
                data = build_dataset_finetune(pairs, idx, seed);
            } else if (method == "aug1") {
                data = build_dataset_aug1(pairs, idx, n);
            } else {
                const auto key = answer_key(file.records);
                auto ranker = make_ranker(ranker_sel, ranker_model, idx, &key, 1);
                data = build_dataset_aug2(pairs, idx, *ranker, TruncationLimits{}, m, n);
            }
            write_rank_examples(out_path, data);
            std::size_t positives = 0;
            for (const auto& e : data) positives += e.label == 1 ? 1 : 0;
            out << dump_line({{"method", method},
                              {"examples", data.size()},
                              {"positives", positives},
                              {"malformed_skipped", file.malformed}})
                << "\n";
            return 0;
        };
    });

    // train-ranker
    TrainConfig train;
    std::string schedule = "sequential";
    std::vector<std::string> dataset_files;
    std::string datasets_dir;
    auto* trainer = app.add_subcommand(
        "train-ranker",
        "Train the builtin ranker: approach 1 (gold vs same-article negative), then approach 3 "
        "(top-n after re-ranking with the approach-1 model), or on given dataset files in order");
    trainer->add_option("--index", index_dir, "Index directory")->required()->check(CLI::ExistingDirectory);
    trainer->add_option("--questions", questions, "Training questions JSONL")->check(CLI::ExistingFile);
    trainer->add_option("--dataset", dataset_files, "Dataset JSONL files, trained on in order")
        ->check(CLI::ExistingFile);
    trainer->add_option("--out", out_path, "Model JSON to write")->required();
    trainer->add_option("--schedule", schedule,
                        "sequential: continue training per stage; concatenated: one run on all stages")
        ->check(CLI::IsMember({"sequential", "concatenated"}))
        ->capture_default_str();
    trainer->add_option("--seed", train.seed, "Shuffle and sampling seed")->capture_default_str();
    trainer->add_option("--epochs", train.epochs, "Gradient descent epochs")->capture_default_str();
    trainer->add_option("--lr", train.learning_rate, "Learning rate")->capture_default_str();
    trainer->add_option("--l2", train.l2, "L2 penalty")->capture_default_str();
    trainer->add_option("--holdout", train.holdout_fraction, "Held-out fraction")->capture_default_str();
    trainer->add_option("--m", m, "Approach 3 retrieval depth")->capture_default_str();
    trainer->add_option("--n", n, "Approach 3 paragraphs kept")->capture_default_str();
    trainer->add_option("--save-datasets", datasets_dir, "Directory for the generated datasets");
    trainer->callback([&] {
        action = [&] {
            if (questions.empty() == dataset_files.empty()) {
                throw CLI::ValidationError("exactly one of --questions or --dataset is required");
            }
            const auto idx = InvertedIndex::load(index_dir);
            ojson stages = ojson::array();
            auto report = [&](const std::string& name, const std::vector<RankExample>& data,
                              const TrainReport& r) {
                stages.push_back({{"stage", name},
                                  {"examples", data.size()},
                                  {"train_accuracy", r.train_accuracy},
                                  {"holdout_accuracy", r.holdout_accuracy},
                                  {"final_loss", r.final_loss}});
            };
            BuiltinRankerModel model;
            if (!dataset_files.empty()) {
                std::vector<RankExample> all;
                const BuiltinRankerModel* init = nullptr;
                for (const auto& f : dataset_files) {
                    auto data = read_rank_examples(f);
                    if (schedule == "concatenated") {
                        all.insert(all.end(), data.begin(), data.end());
                        continue;
                    }
                    auto res = train_builtin_ranker(data, idx, train, init);
                    model = res.model;
                    init = &model;
                    report(f, data, res.report);
                }
                if (schedule == "concatenated") {
                    auto res = train_builtin_ranker(all, idx, train);
                    model = res.model;
                    report("concatenated", all, res.report);
                }
            } else {
                const auto file = read_questions(questions);
                const auto pairs = to_qa_pairs(file.records, idx);
                auto a1 = build_dataset_finetune(pairs, idx, train.seed);
                auto r1 = train_builtin_ranker(a1, idx, train);
                report("approach1", a1, r1.report);
                BuiltinRanker stage1(idx, r1.model);
                auto a3 = build_dataset_aug2(pairs, idx, stage1, train.limits, m, n);
                if (schedule == "sequential") {
                    auto r3 = train_builtin_ranker(a3, idx, train, &r1.model);
                    model = r3.model;
                    report("approach3", a3, r3.report);
                } else {
                    std::vector<RankExample> all = a1;
                    all.insert(all.end(), a3.begin(), a3.end());
                    auto r = train_builtin_ranker(all, idx, train);
                    model = r.model;
                    report("concatenated", all, r.report);
                }
                if (!datasets_dir.empty()) {
                    fs::create_directories(datasets_dir);
                    write_rank_examples(fs::path(datasets_dir) / "approach1.jsonl", a1);
                    write_rank_examples(fs::path(datasets_dir) / "approach3.jsonl", a3);
                }
            }
            model.save(out_path);
            out << dump_line({{"model", out_path}, {"schedule", schedule}, {"stages", stages}}) << "\n";
            return 0;
        };
    });

    // answer
    ConfigFlags answer_flags;
    std::string question, batch;
    auto* answer = app.add_subcommand("answer", "Answer one question or a JSONL batch; prints JSONL answer records");
    answer->add_option("--index", index_dir, "Index directory")->required()->check(CLI::ExistingDirectory);
    auto* q_opt = answer->add_option("--question", question, "Question text");
    auto* b_opt = answer->add_option("--batch", batch, "JSONL with \"question\" and optional \"qid\"")
                      ->check(CLI::ExistingFile);
    q_opt->excludes(b_opt);
    answer->add_option("--gold", gold, "Questions JSONL with answers (oracle scorers)")->check(CLI::ExistingFile);
    answer->add_option("--out", out_path, "Write records here instead of standard output");
    answer_flags.attach(*answer);
    answer->callback([&] {
        action = [&] {
            if (q_opt->count() == 0 && b_opt->count() == 0) {
                throw CLI::ValidationError("one of --question or --batch is required");
            }
            Session s(answer_flags.resolve(), index_dir, gold);
            const auto pipeline = s.pipeline();
            std::vector<BatchQuestion> items;
            if (q_opt->count()) items.push_back({"0", question});
            else items = read_batch(batch);
            std::vector<std::string> texts;
            for (const auto& q : items) texts.push_back(q.question);
            const auto results = pipeline.answer_batch(texts);
            std::ofstream file;
            if (!out_path.empty()) file = jsonl::open_out(out_path);
            std::ostream& sink = out_path.empty() ? out : file;
            std::size_t failed = 0;
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (!results[i].result) {
                    ++failed;
                    logger()->warn("question {} failed: {}", items[i].qid, results[i].error);
                }
                sink << dump_line(answer_record_json(items[i].qid, results[i], s.index)) << "\n";
            }
            return failed == items.size() && !items.empty() ? 1 : 0;
        };
    });

    // tune-weights
    ConfigFlags tune_flags;
    std::string out_dir, write_config;
    auto* tune = app.add_subcommand("tune-weights", "Grid-search fusion weights for top-1 EM on dev questions");
    tune->add_option("--index", index_dir, "Index directory")->required()->check(CLI::ExistingDirectory);
    tune->add_option("--questions", questions, "Dev questions JSONL")->required()->check(CLI::ExistingFile);
    tune->add_option("--out-dir", out_dir, "Writes weights.json, tuning.csv and run_manifest.json")->required();
    tune->add_option("--write-config", write_config, "Also write the effective config with the tuned weights");
    tune_flags.attach(*tune);
    tune->callback([&] {
        action = [&] {
            const auto file = read_questions(questions);
            Session s(tune_flags.resolve(), index_dir, questions);
            const auto pipeline = s.pipeline();
            std::vector<TuneItem> dev(file.records.size());
            parallel_for(dev.size(), s.cfg.workers, [&](std::size_t i) {
                dev[i].golds = file.records[i].answers;
                try {
                    dev[i].spans = pipeline.collect(file.records[i].question).read_spans;
                } catch (const std::exception& e) {
                    logger()->warn("question {} failed: {}", file.records[i].qid, e.what());
                }
            });
            const auto result = tune_weights(dev, s.cfg.grid_step, s.cfg.workers);
            const auto manifest = s.manifest("tune-weights");
            ojson grid = ojson::array();
            for (const auto& p : result.grid) {
                auto w = weights_json(p.weights);
                w["em"] = p.em;
                grid.push_back(std::move(w));
            }
            ojson report;
            report["manifest_hash"] = manifest.hash();
            report["questions"] = dev.size();
            report["grid_step"] = s.cfg.grid_step;
            report["grid_points"] = result.grid.size();
            report["best"] = weights_json(result.best);
            report["best_em"] = result.best_em;
            report["grid"] = std::move(grid);
            fs::create_directories(out_dir);
            write_json(fs::path(out_dir) / "weights.json", report);
            write_text(fs::path(out_dir) / "tuning.csv", tuning_csv(result));
            write_json(fs::path(out_dir) / "run_manifest.json", manifest.to_json());
            if (!write_config.empty()) {
                auto tuned = s.cfg;
                tuned.pipeline.weights = result.best;
                write_json(write_config, to_json(tuned));
            }
            out << dump_line({{"best", weights_json(result.best)}, {"best_em", result.best_em}}) << "\n";
            return 0;
        };
    });

    // eval
    ConfigFlags eval_flags;
    auto* evaluate = app.add_subcommand("eval", "Evaluate EM/F1, recall curves and top-N EM on a questions file");
    evaluate->add_option("--index", index_dir, "Index directory")->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--questions", questions, "Questions JSONL with gold answers")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--out-dir", out_dir, "Writes report.json, curves.csv and run_manifest.json")->required();
    eval_flags.attach(*evaluate);
    evaluate->callback([&] {
        action = [&] {
            const auto file = read_questions(questions);
            if (file.malformed) logger()->warn("skipped {} malformed question records", file.malformed);
            Session s(eval_flags.resolve(), index_dir, questions);
            const auto pipeline = s.pipeline();
            const auto rep = run_eval(file.records, pipeline, {s.cfg.n_grid, s.cfg.strict_tau}, file.malformed);
            auto manifest = s.manifest("eval");
            manifest.inputs["questions"] = file_hash(questions);
            ojson report;
            report["manifest_hash"] = manifest.hash();
            const auto body = rep.to_json();
            for (const auto& [k, v] : body.items()) report[k] = v;
            fs::create_directories(out_dir);
            write_json(fs::path(out_dir) / "report.json", report);
            write_text(fs::path(out_dir) / "curves.csv", rep.curves_csv());
            write_json(fs::path(out_dir) / "run_manifest.json", manifest.to_json());
            out << dump_line({{"em", rep.em}, {"f1", rep.f1}, {"questions", rep.questions}, {"failed", rep.failed}})
                << "\n";
            return 0;
        };
    });

    // bench
    ConfigFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "Batch latency: min over runs of the per-query mean");
    bench->add_option("--index", index_dir, "Index directory")->required()->check(CLI::ExistingDirectory);
    bench->add_option("--questions", questions, "Questions JSONL")->required()->check(CLI::ExistingFile);
    bench->add_option("--out-dir", out_dir, "Writes latency.json and run_manifest.json")->required();
    bench_flags.attach(*bench);
    bench->callback([&] {
        action = [&] {
            const auto file = read_questions(questions);
            Session s(bench_flags.resolve(), index_dir, questions);
            const auto pipeline = s.pipeline();
            const auto texts = question_texts(file.records);
            const auto rep = run_benchmark(texts, pipeline, s.cfg.bench_runs, s.cfg.bench_queries);
            auto manifest = s.manifest("bench");
            manifest.inputs["questions"] = file_hash(questions);
            ojson report;
            report["manifest_hash"] = manifest.hash();
            const auto body = rep.to_json();
            for (const auto& [k, v] : body.items()) report[k] = v;
            fs::create_directories(out_dir);
            write_json(fs::path(out_dir) / "latency.json", report);
            write_json(fs::path(out_dir) / "run_manifest.json", manifest.to_json());
            out << dump_line({{"reported_ms", rep.reported_ms}, {"workers", rep.workers}}) << "\n";
            return 0;
        };
    });

    // convert-squad
    std::string articles_out, questions_out;
    auto* squad = app.add_subcommand("convert-squad", "Convert SQuAD v1.1 JSON to articles and questions JSONL");
    squad->add_option("--in", in, "SQuAD v1.1 JSON")->required()->check(CLI::ExistingFile);
    squad->add_option("--articles-out", articles_out, "Articles JSONL to write")->required();
    squad->add_option("--questions-out", questions_out, "Questions JSONL to write")->required();
    squad->callback([&] {
        action = [&] {
            std::ifstream file(in, std::ios::binary);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(file);
            } catch (const nlohmann::json::parse_error& e) {
                throw FormatError(in + ": " + e.what());
            }
            const auto conv = convert_squad(j);
            write_articles(articles_out, conv.articles);
            write_questions(questions_out, conv.questions);
            out << dump_line({{"articles", conv.articles.size()}, {"questions", conv.questions.size()}}) << "\n";
            return 0;
        };
    });

    std::vector<std::string> argv_store{"mindstone"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    try {
        return action();
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mindstone::cli
