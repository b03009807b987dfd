#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "mindstone/index.hpp"

namespace mindstone {

/// Neural RM3 settings. `second_pass_n == 0` means "same as n_retriever".
struct ExpansionParams {
    bool enabled = false;
    double alpha = 0.5;
    std::size_t terms = 20;
    std::size_t second_pass_n = 0;

    void validate() const;
};

/// Expanded query: alpha * q + (1 - alpha) * sum of doc_tfidf_top(d, T) over
/// documents whose raw ranker score is strictly positive. Per-document
/// vectors are summed unweighted; zero-weight terms are dropped.
QueryVector expand_query(const QueryVector& query,
                         std::span<const std::pair<std::string, double>> ranked,
                         const InvertedIndex& index, const ExpansionParams& params);

}  // namespace mindstone
