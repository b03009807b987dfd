#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "mindstone/config.hpp"
#include "mindstone/index.hpp"
#include "mindstone/scorers.hpp"

namespace mindstone {

inline constexpr const char* kToolVersion = "0.1.0";

/// Scorers selected by a RunConfig.
struct ScorerSet {
    std::unique_ptr<Ranker> ranker;
    std::unique_ptr<Reader> reader;
};

/// Builds a ranker from its selector: "builtin" (needs `model_path`),
/// "oracle" (needs `key`), "constant:<value>" or "external:<command line>".
std::unique_ptr<Ranker> make_ranker(const std::string& selector, const std::string& model_path,
                                    const InvertedIndex& index, const AnswerKey* key,
                                    std::size_t pool_size);
/// "builtin", "oracle" (needs `key`) or "external:<command line>".
std::unique_ptr<Reader> make_reader(const std::string& selector, const InvertedIndex& index,
                                    const AnswerKey* key, std::size_t pool_size);

ScorerSet make_scorers(const RunConfig& cfg, const InvertedIndex& index, const AnswerKey* key);

/// 0 means every available core.
std::size_t resolve_workers(std::size_t workers) noexcept;

/// Everything needed to regenerate a report. hash() covers the fields that
/// determine report content (worker count and timestamp excluded), and every
/// report carries it.
struct RunManifest {
    std::string command;
    nlohmann::ordered_json config;
    std::string index_manifest_hash;
    std::string index_checksum;
    std::string ranker;
    std::string reader;
    std::map<std::string, std::string> inputs;  // name -> content hash
    std::string tool_version = kToolVersion;
    std::string timestamp;

    std::string hash() const;
    nlohmann::ordered_json to_json() const;
};

/// FNV-1a hex of a file's bytes.
std::string file_hash(const std::filesystem::path& path);

/// Manifest for a run over an index directory; fills index hashes, scorer
/// descriptors, config snapshot and the current UTC time.
RunManifest make_run_manifest(std::string command, const RunConfig& cfg,
                              const std::filesystem::path& index_dir, const InvertedIndex& index,
                              const ScorerSet& scorers);

}  // namespace mindstone
