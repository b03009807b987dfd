#include "mindstone/run.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>

#include "mindstone/builtin.hpp"
#include "mindstone/errors.hpp"
#include "mindstone/external_scorer.hpp"
#include "mindstone/parallel.hpp"

namespace mindstone {

namespace {

constexpr std::string_view kExternal = "external:";
constexpr std::string_view kConstant = "constant:";

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const AnswerKey& need_key(const AnswerKey* key, const char* what) {
    if (!key) throw InvalidArgument(std::string(what) + " needs gold answers (questions file)");
    return *key;
}

}  // namespace

std::unique_ptr<Ranker> make_ranker(const std::string& selector, const std::string& model_path,
                                    const InvertedIndex& index, const AnswerKey* key,
                                    std::size_t pool_size) {
    if (selector == "builtin") {
        if (model_path.empty()) throw InvalidArgument("builtin ranker needs a model (--ranker-model)");
        return std::make_unique<BuiltinRanker>(index, BuiltinRankerModel::load(model_path));
    }
    if (selector == "oracle") return std::make_unique<OracleRanker>(need_key(key, "oracle ranker"));
    if (selector.starts_with(kConstant)) {
        const auto text = selector.substr(kConstant.size());
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size()) throw InvalidArgument("bad constant ranker '" + selector + "'");
        return std::make_unique<ConstantRanker>(value);
    }
    if (selector.starts_with(kExternal)) {
        auto pool = std::make_shared<const ExternalScorerPool>(selector.substr(kExternal.size()),
                                                               ScorerRole::Rank, pool_size);
        return std::make_unique<ExternalRanker>(std::move(pool));
    }
    throw InvalidArgument("unknown ranker '" + selector + "'");
}

std::unique_ptr<Reader> make_reader(const std::string& selector, const InvertedIndex& index,
                                    const AnswerKey* key, std::size_t pool_size) {
    if (selector == "builtin") return std::make_unique<BuiltinReader>(index);
    if (selector == "oracle") return std::make_unique<OracleReader>(need_key(key, "oracle reader"));
    if (selector.starts_with(kExternal)) {
        auto pool = std::make_shared<const ExternalScorerPool>(selector.substr(kExternal.size()),
                                                               ScorerRole::Read, pool_size);
        return std::make_unique<ExternalReader>(std::move(pool));
    }
    throw InvalidArgument("unknown reader '" + selector + "'");
}

ScorerSet make_scorers(const RunConfig& cfg, const InvertedIndex& index, const AnswerKey* key) {
    const auto pool = std::max<std::size_t>(1, cfg.scorer_pool_size);
    ScorerSet s;
    s.ranker = make_ranker(cfg.ranker, cfg.ranker_model, index, key, pool);
    s.reader = make_reader(cfg.reader, index, key, pool);
    return s;
}

std::size_t resolve_workers(std::size_t workers) noexcept {
    return workers == 0 ? default_workers() : workers;
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return hex64(fnv1a64(bytes));
}

std::string RunManifest::hash() const {
    nlohmann::ordered_json j = to_json();
    j.erase("timestamp");
    j.erase("manifest_hash");
    j["config"].erase("workers");
    return hex64(fnv1a64(j.dump()));
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["config"] = config;
    j["index"] = {{"manifest_hash", index_manifest_hash}, {"checksum", index_checksum}};
    j["scorers"] = {{"ranker", ranker}, {"reader", reader}};
    nlohmann::ordered_json in = nlohmann::ordered_json::object();
    for (const auto& [k, v] : inputs) in[k] = v;
    j["inputs"] = in;
    j["timestamp"] = timestamp;
    return j;
}

RunManifest make_run_manifest(std::string command, const RunConfig& cfg,
                              const std::filesystem::path& index_dir, const InvertedIndex& index,
                              const ScorerSet& scorers) {
    RunManifest m;
    m.command = std::move(command);
    m.config = to_json(cfg);
    m.index_manifest_hash = file_hash(index_dir / "manifest.json");
    m.index_checksum = index.checksum();
    m.ranker = scorers.ranker ? scorers.ranker->descriptor() : "";
    m.reader = scorers.reader ? scorers.reader->descriptor() : "";
    if (cfg.ranker == "builtin" && !cfg.ranker_model.empty()) {
        m.inputs["ranker_model"] = file_hash(cfg.ranker_model);
    }
    m.timestamp = utc_now();
    return m;
}

}  // namespace mindstone
