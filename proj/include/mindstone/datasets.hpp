#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mindstone/index.hpp"
#include "mindstone/scorers.hpp"

namespace mindstone {

/// One record of the binary "does this paragraph contain an answer" dataset.
struct RankExample {
    std::string question;
    std::string para_id;
    std::string text;
    int label = 0;

    friend bool operator==(const RankExample&, const RankExample&) = default;
};

/// Question with gold answers. `gold_para_id` is resolved against a corpus
/// when the record carries an article id and paragraph text.
struct QaPair {
    std::string qid;
    std::string question;
    std::vector<std::string> answers;
    std::optional<std::string> gold_para_id;
};

inline constexpr std::size_t kAugRetrieveDepth = 100;  // m
inline constexpr std::size_t kAugKeep = 5;             // n

/// Approach 1: gold paragraph as positive plus one same-article paragraph
/// that contains none of the gold answers as negative. The negative is drawn
/// with a generator seeded from (seed, qid), so output is order independent.
std::vector<RankExample> build_dataset_finetune(const std::vector<QaPair>& pairs,
                                                const InvertedIndex& corpus,
                                                std::uint64_t seed = 0);

/// Approach 2: top-n retrieved paragraphs per question, labelled by answer
/// containment.
std::vector<RankExample> build_dataset_aug1(const std::vector<QaPair>& questions,
                                            const InvertedIndex& index,
                                            std::size_t n = kAugKeep);

/// Approach 3: retrieve m, re-rank by S_ranker, keep the top n. Equal ranker
/// scores keep retrieval order, so a constant ranker reproduces aug1.
std::vector<RankExample> build_dataset_aug2(const std::vector<QaPair>& questions,
                                            const InvertedIndex& index, const Ranker& ranker,
                                            const TruncationLimits& limits,
                                            std::size_t m = kAugRetrieveDepth,
                                            std::size_t n = kAugKeep);

std::vector<RankExample> read_rank_examples(const std::filesystem::path& path);
void write_rank_examples(const std::filesystem::path& path, const std::vector<RankExample>& data);

}  // namespace mindstone
