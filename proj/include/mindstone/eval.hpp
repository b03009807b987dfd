#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mindstone/corpus.hpp"
#include "mindstone/datasets.hpp"
#include "mindstone/fusion.hpp"
#include "mindstone/index.hpp"
#include "mindstone/metrics.hpp"
#include "mindstone/pipeline.hpp"

namespace mindstone {

struct GoldRecord {
    std::string qid;
    std::string question;
    std::vector<std::string> answers;
    std::optional<std::string> gold_article_id;
    std::optional<std::string> gold_paragraph;
};

struct QuestionsFile {
    std::vector<GoldRecord> records;
    std::size_t malformed = 0;  // lines skipped
};

/// Questions JSONL; malformed records are skipped and counted.
QuestionsFile read_questions(const std::filesystem::path& path);
void write_questions(const std::filesystem::path& path, const std::vector<GoldRecord>& records);

/// SQuAD v1.1 JSON -> articles (one per title, contexts as paragraphs) and
/// question records carrying their source paragraph.
struct SquadConversion {
    std::vector<Article> articles;
    std::vector<GoldRecord> questions;
};
SquadConversion convert_squad(const nlohmann::json& squad);

/// Resolves each record's gold paragraph to a para_id of `index`: exact body
/// match within the gold article first, then the best token-set Jaccard match
/// within that article.
std::vector<QaPair> to_qa_pairs(const std::vector<GoldRecord>& records, const InvertedIndex& index);

AnswerKey answer_key(const std::vector<GoldRecord>& records);

/// Lenient hit: any of the first N paragraphs contains a gold answer.
bool recall_at(const InvertedIndex& index, std::span<const std::string> para_ids,
               std::span<const std::string> golds, std::size_t n);

/// Strict hit: any of the first N paragraph bodies has token-set Jaccard >= tau
/// with the gold source paragraph.
bool strict_recall_at(const InvertedIndex& index, std::span<const std::string> para_ids,
                      std::string_view gold_paragraph, std::size_t n, double tau);

/// Any of the first N answers is an exact match.
bool topn_em(std::span<const RankedAnswer> answers, std::span<const std::string> golds,
             std::size_t n);

struct EvalReport {
    std::size_t questions = 0;
    std::size_t failed = 0;           // pipeline errors, scored as misses
    std::size_t malformed = 0;        // records skipped while reading
    std::size_t strict_excluded = 0;  // records without a gold paragraph
    std::size_t n_retriever = 0;
    double em = 0.0;
    double f1 = 0.0;
    double recall_at_n_retriever = 0.0;  // first-pass retrieval
    /// Retriever curve, lenient. Uses the expanded-query retrieval when
    /// neural RM3 is on, the first pass otherwise.
    std::map<std::size_t, double> recall_at;
    std::map<std::size_t, double> ranker_recall_at;
    std::map<std::size_t, double> strict_recall_at;
    std::map<std::size_t, double> strict_ranker_recall_at;
    std::map<std::size_t, double> topn_em;

    nlohmann::ordered_json to_json() const;
    /// Header row plus one row per grid N:
    /// N,retriever_recall,ranker_recall,strict_retriever_recall,strict_ranker_recall,topn_em
    std::string curves_csv() const;
};

struct EvalOptions {
    std::vector<std::size_t> n_grid{1, 5, 20, 100};
    double strict_tau = 0.5;
};

/// Runs the pipeline over every record (questions in parallel on the
/// pipeline's workers) and aggregates metrics in input order.
EvalReport run_eval(const std::vector<GoldRecord>& records, const Pipeline& pipeline,
                    const EvalOptions& options, std::size_t malformed = 0);

struct LatencyReport {
    std::size_t runs = 0;
    std::size_t queries_per_run = 0;
    std::size_t workers = 1;
    std::size_t failed = 0;
    std::vector<double> per_run_mean_ms;
    double reported_ms = 0.0;
    /// Mean per-query stage times of the fastest run.
    std::map<std::string, double> stage_breakdown_ms;

    double breakdown_total_ms() const;
    nlohmann::ordered_json to_json() const;
};

/// One untimed warm-up pass, then `runs` timed passes of answer_batch over the
/// same batch of `queries_per_run` questions (cycled if fewer are given).
/// reported_ms is the minimum per-run mean.
LatencyReport run_benchmark(std::span<const std::string> questions, const Pipeline& pipeline,
                            std::size_t runs, std::size_t queries_per_run);

}  // namespace mindstone
