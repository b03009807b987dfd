#include "mindstone/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "mindstone/errors.hpp"

namespace mindstone {

std::size_t PipelineConfig::n_reader_effective() const {
    if (n_reader) return *n_reader;
    auto n = static_cast<std::size_t>(std::ceil(read_fraction * static_cast<double>(n_retriever) - 1e-12));
    return std::max<std::size_t>(1, n);
}

void PipelineConfig::validate() const {
    if (!(read_fraction > 0.0 && read_fraction <= 1.0)) {
        throw InvalidArgument("read_fraction must be in (0, 1]");
    }
    if (n_reader && *n_reader == 0) throw InvalidArgument("n_reader must be >= 1");
    if (k_spans_per_paragraph == 0) throw InvalidArgument("k_spans_per_paragraph must be >= 1");
    rm3.validate();
    weights.validate();
    limits.validate();
}

namespace {

using json = nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw FormatError("unknown config key '" + where + k + "'");
    }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

}  // namespace

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    const auto& p = cfg.pipeline;
    nlohmann::ordered_json j;
    j["n_retriever"] = p.n_retriever;
    j["read_fraction"] = p.read_fraction;
    j["n_reader"] = p.n_reader ? json(*p.n_reader) : json(nullptr);
    j["rm3"] = {{"enabled", p.rm3.enabled},
                {"alpha", p.rm3.alpha},
                {"terms", p.rm3.terms},
                {"second_pass_n", p.rm3.second_pass_n},
                {"rescore_original", p.rm3_rescore_original}};
    j["fusion"] = {{"w_retriever", p.weights.w_retriever},
                   {"w_ranker", p.weights.w_ranker},
                   {"w_reader", p.weights.w_reader}};
    j["k_spans_per_paragraph"] = p.k_spans_per_paragraph;
    j["limits"] = {{"ranker_para_tokens", p.limits.ranker_para_tokens},
                   {"reader_total_tokens", p.limits.reader_total_tokens}};
    j["ranker"] = cfg.ranker;
    j["ranker_model"] = cfg.ranker_model;
    j["reader"] = cfg.reader;
    j["scorer_pool_size"] = cfg.scorer_pool_size;
    j["eval"] = {{"strict_tau", cfg.strict_tau}, {"n_grid", cfg.n_grid}, {"grid_step", cfg.grid_step}};
    j["bench"] = {{"runs", cfg.bench_runs}, {"queries_per_run", cfg.bench_queries}};
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    return j;
}

RunConfig run_config_from_json(const json& j, RunConfig cfg) {
    try {
        if (!j.is_object()) throw FormatError("run config must be a JSON object");
        reject_unknown(j,
                       {"n_retriever", "read_fraction", "n_reader", "rm3", "fusion",
                        "k_spans_per_paragraph", "limits", "ranker", "ranker_model", "reader",
                        "scorer_pool_size", "eval", "bench", "seed", "workers"},
                       "");
        auto& p = cfg.pipeline;
        take(j, "n_retriever", p.n_retriever);
        take(j, "read_fraction", p.read_fraction);
        if (auto it = j.find("n_reader"); it != j.end()) {
            p.n_reader = it->is_null() ? std::nullopt : std::optional(it->get<std::size_t>());
        }
        if (auto it = j.find("rm3"); it != j.end()) {
            reject_unknown(*it, {"enabled", "alpha", "terms", "second_pass_n", "rescore_original"}, "rm3.");
            take(*it, "enabled", p.rm3.enabled);
            take(*it, "alpha", p.rm3.alpha);
            take(*it, "terms", p.rm3.terms);
            take(*it, "second_pass_n", p.rm3.second_pass_n);
            take(*it, "rescore_original", p.rm3_rescore_original);
        }
        if (auto it = j.find("fusion"); it != j.end()) {
            reject_unknown(*it, {"w_retriever", "w_ranker", "w_reader"}, "fusion.");
            take(*it, "w_retriever", p.weights.w_retriever);
            take(*it, "w_ranker", p.weights.w_ranker);
            take(*it, "w_reader", p.weights.w_reader);
        }
        take(j, "k_spans_per_paragraph", p.k_spans_per_paragraph);
        if (auto it = j.find("limits"); it != j.end()) {
            reject_unknown(*it, {"ranker_para_tokens", "reader_total_tokens"}, "limits.");
            take(*it, "ranker_para_tokens", p.limits.ranker_para_tokens);
            take(*it, "reader_total_tokens", p.limits.reader_total_tokens);
        }
        take(j, "ranker", cfg.ranker);
        take(j, "ranker_model", cfg.ranker_model);
        take(j, "reader", cfg.reader);
        take(j, "scorer_pool_size", cfg.scorer_pool_size);
        if (auto it = j.find("eval"); it != j.end()) {
            reject_unknown(*it, {"strict_tau", "n_grid", "grid_step"}, "eval.");
            take(*it, "strict_tau", cfg.strict_tau);
            take(*it, "n_grid", cfg.n_grid);
            take(*it, "grid_step", cfg.grid_step);
        }
        if (auto it = j.find("bench"); it != j.end()) {
            reject_unknown(*it, {"runs", "queries_per_run"}, "bench.");
            take(*it, "runs", cfg.bench_runs);
            take(*it, "queries_per_run", cfg.bench_queries);
        }
        take(j, "seed", cfg.seed);
        take(j, "workers", cfg.workers);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad run config: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open run config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return run_config_from_json(j, std::move(base));
}

}  // namespace mindstone
