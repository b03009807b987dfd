#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mindstone/expansion.hpp"
#include "mindstone/fusion.hpp"
#include "mindstone/scorers.hpp"

namespace mindstone {

struct PipelineConfig {
    std::size_t n_retriever = 100;
    double read_fraction = 0.025;
    std::optional<std::size_t> n_reader;
    ExpansionParams rm3;
    /// Re-score RM3-only candidates with the original question instead of
    /// giving them S_retriever = 0.
    bool rm3_rescore_original = false;
    FusionWeights weights;
    std::size_t k_spans_per_paragraph = 1;
    TruncationLimits limits;

    /// Explicit n_reader if set, else max(1, ceil(read_fraction * n_retriever)).
    std::size_t n_reader_effective() const;
    std::size_t second_pass_n_effective() const {
        return rm3.second_pass_n == 0 ? n_retriever : rm3.second_pass_n;
    }
    void validate() const;
};

/// Everything a run needs besides input paths: pipeline settings, scorer
/// selection and evaluation knobs. Serialized as the run config JSON.
struct RunConfig {
    PipelineConfig pipeline;
    /// "builtin", "oracle", "constant:<value>" or "external:<command line>".
    std::string ranker = "builtin";
    std::string ranker_model;  // path of the builtin ranker model
    /// "builtin", "oracle" or "external:<command line>".
    std::string reader = "builtin";
    std::size_t scorer_pool_size = 1;
    double strict_tau = 0.5;
    std::vector<std::size_t> n_grid{1, 5, 20, 100};
    double grid_step = 0.05;
    std::size_t bench_runs = 5;
    std::size_t bench_queries = 200;
    std::uint64_t seed = 0;
    std::size_t workers = 0;  // 0: all available cores
};

/// Run config JSON: unknown keys are rejected; missing keys keep defaults.
nlohmann::ordered_json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace mindstone
