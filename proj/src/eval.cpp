#include "mindstone/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "mindstone/errors.hpp"
#include "mindstone/expansion.hpp"
#include "mindstone/jsonl.hpp"
#include "mindstone/parallel.hpp"

namespace mindstone {

namespace {

using json = nlohmann::json;

std::optional<GoldRecord> parse_record(const json& j) {
    if (!j.is_object()) return std::nullopt;
    auto str = [&](const char* key) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) return std::nullopt;
        return it->get<std::string>();
    };
    auto qid = str("qid");
    auto question = str("question");
    if (!qid || !question || qid->empty() || trim(*question).empty()) return std::nullopt;
    auto it = j.find("answers");
    if (it == j.end() || !it->is_array() || it->empty()) return std::nullopt;
    GoldRecord r{*qid, *question, {}, std::nullopt, std::nullopt};
    for (const auto& a : *it) {
        if (!a.is_string() || a.get_ref<const std::string&>().empty()) return std::nullopt;
        r.answers.push_back(a.get<std::string>());
    }
    for (const char* key : {"gold_article_id", "gold_paragraph"}) {
        if (auto f = j.find(key); f != j.end() && !f->is_null() && !f->is_string()) return std::nullopt;
    }
    r.gold_article_id = str("gold_article_id");
    r.gold_paragraph = str("gold_paragraph");
    return r;
}

std::string collapse_newlines(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(c == '\n' || c == '\r' ? ' ' : c);
    return std::string(trim(out));
}

std::string slug(std::string_view title) {
    std::string out;
    for (char c : title) {
        if (c == ' ' || c == '\t') out.push_back('_');
        else if (c != '#') out.push_back(c);
    }
    return out.empty() ? "article" : out;
}

double mean(std::size_t hits, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

template <typename Map>
nlohmann::ordered_json map_json(const Map& m) {
    auto out = nlohmann::ordered_json::object();
    for (const auto& [n, v] : m) out[std::to_string(n)] = v;
    return out;
}

/// Per-question outcome gathered in parallel, reduced in input order.
struct QuestionOutcome {
    bool failed = false;
    double em = 0.0;
    double f1 = 0.0;
    bool recall_n_retriever = false;
    bool strict_scored = false;
    std::vector<char> recall, ranker_recall, strict, strict_ranker, topn;
};

}  // namespace

QuestionsFile read_questions(const std::filesystem::path& path) {
    QuestionsFile out;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::optional<GoldRecord> rec;
        try {
            rec = parse_record(json::parse(line));
        } catch (const json::exception&) {
        }
        if (rec) out.records.push_back(std::move(*rec));
        else ++out.malformed;
    }
    return out;
}

void write_questions(const std::filesystem::path& path, const std::vector<GoldRecord>& records) {
    auto out = jsonl::open_out(path);
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["qid"] = r.qid;
        j["question"] = r.question;
        j["answers"] = r.answers;
        if (r.gold_article_id) j["gold_article_id"] = *r.gold_article_id;
        if (r.gold_paragraph) j["gold_paragraph"] = *r.gold_paragraph;
        out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

SquadConversion convert_squad(const json& squad) {
    SquadConversion out;
    try {
        const auto& data = squad.at("data");
        if (!data.is_array()) throw FormatError("SQuAD 'data' must be an array");
        std::set<std::string> used_ids;
        for (const auto& article : data) {
            const auto title = article.at("title").get<std::string>();
            auto id = slug(title);
            for (int k = 2; used_ids.count(id); ++k) id = slug(title) + "_" + std::to_string(k);
            used_ids.insert(id);

            Article a{id, title, {}};
            for (const auto& para : article.at("paragraphs")) {
                auto context = collapse_newlines(para.at("context").get<std::string>());
                if (context.empty()) continue;
                if (!a.body.empty()) a.body += "\n\n";
                a.body += context;
                for (const auto& qa : para.at("qas")) {
                    GoldRecord r;
                    r.qid = qa.at("id").get<std::string>();
                    r.question = qa.at("question").get<std::string>();
                    for (const auto& ans : qa.at("answers")) {
                        auto text = ans.at("text").get<std::string>();
                        if (!text.empty() && std::find(r.answers.begin(), r.answers.end(), text) == r.answers.end()) {
                            r.answers.push_back(std::move(text));
                        }
                    }
                    if (r.answers.empty()) continue;
                    r.gold_article_id = id;
                    r.gold_paragraph = context;
                    out.questions.push_back(std::move(r));
                }
            }
            if (!a.body.empty()) out.articles.push_back(std::move(a));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad SQuAD file: ") + e.what());
    }
    return out;
}

std::vector<QaPair> to_qa_pairs(const std::vector<GoldRecord>& records, const InvertedIndex& index) {
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_article;
    for (std::size_t i = 0; i < index.doc_count(); ++i) {
        by_article[index.paragraph(i).article_id].push_back(i);
    }
    std::vector<QaPair> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        QaPair p{r.qid, r.question, r.answers, std::nullopt};
        if (r.gold_paragraph && r.gold_article_id) {
            auto it = by_article.find(*r.gold_article_id);
            if (it != by_article.end()) {
                const auto gold = trim(*r.gold_paragraph);
                double best = -1.0;
                for (auto ord : it->second) {
                    const auto& para = index.paragraph(ord);
                    if (para.body == gold) {
                        p.gold_para_id = para.para_id;
                        break;
                    }
                    const double sim = jaccard_similarity(para.body, gold);
                    if (sim > best) {
                        best = sim;
                        p.gold_para_id = para.para_id;
                    }
                }
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

AnswerKey answer_key(const std::vector<GoldRecord>& records) {
    AnswerKey key;
    for (const auto& r : records) {
        auto& answers = key[r.question];
        answers.insert(answers.end(), r.answers.begin(), r.answers.end());
    }
    return key;
}

bool recall_at(const InvertedIndex& index, std::span<const std::string> para_ids,
               std::span<const std::string> golds, std::size_t n) {
    n = std::min(n, para_ids.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (contains_answer(index.paragraph(para_ids[i]).full_text, golds)) return true;
    }
    return false;
}

bool strict_recall_at(const InvertedIndex& index, std::span<const std::string> para_ids,
                      std::string_view gold_paragraph, std::size_t n, double tau) {
    n = std::min(n, para_ids.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (jaccard_similarity(index.paragraph(para_ids[i]).body, gold_paragraph) >= tau) return true;
    }
    return false;
}

bool topn_em(std::span<const RankedAnswer> answers, std::span<const std::string> golds,
             std::size_t n) {
    n = std::min(n, answers.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (exact_match(answers[i].text, golds)) return true;
    }
    return false;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["questions"] = questions;
    j["failed"] = failed;
    j["malformed_skipped"] = malformed;
    j["strict_excluded"] = strict_excluded;
    j["n_retriever"] = n_retriever;
    j["em"] = em;
    j["f1"] = f1;
    j["recall_at_n_retriever"] = recall_at_n_retriever;
    j["recall_at"] = map_json(recall_at);
    j["ranker_recall_at"] = map_json(ranker_recall_at);
    j["strict_recall_at"] = map_json(strict_recall_at);
    j["strict_ranker_recall_at"] = map_json(strict_ranker_recall_at);
    j["topn_em"] = map_json(topn_em);
    return j;
}

std::string EvalReport::curves_csv() const {
    std::ostringstream out;
    out << "N,retriever_recall,ranker_recall,strict_retriever_recall,strict_ranker_recall,topn_em\n";
    for (const auto& [n, r] : recall_at) {
        out << n << ',' << fmt6(r) << ',' << fmt6(ranker_recall_at.at(n)) << ','
            << fmt6(strict_recall_at.at(n)) << ',' << fmt6(strict_ranker_recall_at.at(n)) << ','
            << fmt6(topn_em.at(n)) << '\n';
    }
    return out.str();
}

EvalReport run_eval(const std::vector<GoldRecord>& records, const Pipeline& pipeline,
                    const EvalOptions& options, std::size_t malformed) {
    if (options.n_grid.empty()) throw InvalidArgument("n_grid must not be empty");
    std::vector<std::size_t> grid = options.n_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto& index = pipeline.index();
    const auto n_retriever = pipeline.config().n_retriever;
    const auto depth = std::max(grid.back(), n_retriever);

    std::vector<QuestionOutcome> outcomes(records.size());
    parallel_for(records.size(), pipeline.workers(), [&](std::size_t qi) {
        const auto& rec = records[qi];
        auto& o = outcomes[qi];
        o.recall.assign(grid.size(), 0);
        o.ranker_recall.assign(grid.size(), 0);
        o.strict.assign(grid.size(), 0);
        o.strict_ranker.assign(grid.size(), 0);
        o.topn.assign(grid.size(), 0);

        std::vector<std::string> deep;
        for (auto& h : retrieve(index, rec.question, depth).hits) deep.push_back(std::move(h.para_id));
        const auto first_pass = deep;

        std::optional<AnswerResult> result;
        try {
            result = pipeline.answer(rec.question);
        } catch (const std::exception&) {
            o.failed = true;
        }
        // With neural RM3 the retrieval stage ends with the expanded query.
        // It is re-run at curve depth so both settings are cut at the same N.
        if (pipeline.config().rm3.enabled && result && !result->candidates.second_pass.empty()) {
            std::vector<std::pair<std::string, double>> ranked;
            for (const auto& c : result->candidates.pool) {
                if (c.provenance == Provenance::FirstPass) ranked.emplace_back(c.para_id, c.s_ranker);
            }
            const auto expanded =
                expand_query(question_vector(index, rec.question), ranked, index, pipeline.config().rm3);
            deep.clear();
            for (auto& h : retrieve_weighted(index, expanded, depth).hits) deep.push_back(std::move(h.para_id));
        }
        std::vector<std::string> pool;
        if (result) {
            for (const auto& c : result->candidates.pool) pool.push_back(c.para_id);
            if (!result->answers.empty()) {
                o.em = exact_match(result->answers.front().text, rec.answers) ? 1.0 : 0.0;
                o.f1 = f1_score(result->answers.front().text, rec.answers);
            }
        }
        o.recall_n_retriever = recall_at(index, first_pass, rec.answers, n_retriever);
        o.strict_scored = rec.gold_paragraph.has_value();
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto n = grid[g];
            o.recall[g] = recall_at(index, deep, rec.answers, n);
            o.ranker_recall[g] = recall_at(index, pool, rec.answers, n);
            if (o.strict_scored) {
                o.strict[g] = strict_recall_at(index, deep, *rec.gold_paragraph, n, options.strict_tau);
                o.strict_ranker[g] = strict_recall_at(index, pool, *rec.gold_paragraph, n, options.strict_tau);
            }
            if (result) o.topn[g] = topn_em(result->answers, rec.answers, n);
        }
    });

    EvalReport rep;
    rep.questions = records.size();
    rep.malformed = malformed;
    rep.n_retriever = n_retriever;
    double em = 0.0, f1 = 0.0;
    std::size_t at_n = 0, strict_total = 0;
    std::vector<std::size_t> recall(grid.size()), ranker(grid.size()), strict(grid.size()),
        strict_ranker(grid.size()), topn(grid.size());
    for (const auto& o : outcomes) {
        rep.failed += o.failed ? 1 : 0;
        em += o.em;
        f1 += o.f1;
        at_n += o.recall_n_retriever ? 1 : 0;
        if (o.strict_scored) ++strict_total;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            recall[g] += o.recall[g];
            ranker[g] += o.ranker_recall[g];
            strict[g] += o.strict[g];
            strict_ranker[g] += o.strict_ranker[g];
            topn[g] += o.topn[g];
        }
    }
    rep.strict_excluded = records.size() - strict_total;
    const double total = static_cast<double>(records.size());
    rep.em = records.empty() ? 0.0 : em / total;
    rep.f1 = records.empty() ? 0.0 : f1 / total;
    rep.recall_at_n_retriever = mean(at_n, records.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        rep.recall_at[grid[g]] = mean(recall[g], records.size());
        rep.ranker_recall_at[grid[g]] = mean(ranker[g], records.size());
        rep.strict_recall_at[grid[g]] = mean(strict[g], strict_total);
        rep.strict_ranker_recall_at[grid[g]] = mean(strict_ranker[g], strict_total);
        rep.topn_em[grid[g]] = mean(topn[g], records.size());
    }
    return rep;
}

double LatencyReport::breakdown_total_ms() const {
    double s = 0.0;
    for (const auto& [k, v] : stage_breakdown_ms) {
        if (k != "total") s += v;
    }
    return s;
}

nlohmann::ordered_json LatencyReport::to_json() const {
    nlohmann::ordered_json j;
    j["runs"] = runs;
    j["queries_per_run"] = queries_per_run;
    j["workers"] = workers;
    j["failed"] = failed;
    j["per_run_mean_ms"] = per_run_mean_ms;
    j["reported_ms"] = reported_ms;
    nlohmann::ordered_json b;
    for (const auto& [k, v] : stage_breakdown_ms) b[k] = v;
    j["stage_breakdown_ms"] = b;
    return j;
}

LatencyReport run_benchmark(std::span<const std::string> questions, const Pipeline& pipeline,
                            std::size_t runs, std::size_t queries_per_run) {
    if (runs == 0) throw InvalidArgument("runs must be >= 1");
    if (queries_per_run == 0) throw InvalidArgument("queries_per_run must be >= 1");
    if (questions.empty()) throw InvalidArgument("benchmark needs at least one question");

    std::vector<std::string> batch;
    batch.reserve(queries_per_run);
    for (std::size_t i = 0; i < queries_per_run; ++i) batch.push_back(questions[i % questions.size()]);

    LatencyReport rep;
    rep.runs = runs;
    rep.queries_per_run = queries_per_run;
    rep.workers = pipeline.workers();

    (void)pipeline.answer_batch(batch);  // warm-up

    std::size_t best_run = 0;
    std::vector<BatchItem> fastest;
    for (std::size_t r = 0; r < runs; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        auto items = pipeline.answer_batch(batch);
        const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rep.per_run_mean_ms.push_back(wall / static_cast<double>(batch.size()));
        if (r == 0 || rep.per_run_mean_ms.back() < rep.per_run_mean_ms[best_run]) {
            best_run = r;
            fastest = std::move(items);
        }
    }
    rep.reported_ms = *std::min_element(rep.per_run_mean_ms.begin(), rep.per_run_mean_ms.end());

    StageTrace sum;
    for (const auto& item : fastest) {
        if (!item.result) {
            ++rep.failed;
            continue;
        }
        const auto& t = item.result->trace;
        sum.retrieve_ms += t.retrieve_ms;
        sum.rank_ms += t.rank_ms;
        sum.rm3_ms += t.rm3_ms;
        sum.read_ms += t.read_ms;
        sum.fuse_ms += t.fuse_ms;
        sum.total_ms += t.total_ms;
    }
    const double n = static_cast<double>(batch.size());
    rep.stage_breakdown_ms = {{"retrieve", sum.retrieve_ms / n}, {"rank", sum.rank_ms / n},
                              {"rm3", sum.rm3_ms / n},           {"read", sum.read_ms / n},
                              {"fuse", sum.fuse_ms / n},         {"total", sum.total_ms / n}};
    return rep;
}

}  // namespace mindstone
