#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mindstone {

/// SQuAD answer normalization: lowercase, strip ASCII punctuation, drop the
/// articles a/an/the as whole tokens, collapse whitespace.
std::string normalize_answer(std::string_view s);

bool exact_match(std::string_view prediction, std::span<const std::string> golds);

/// Max over golds of token-level F1 on normalized token multisets.
double f1_score(std::string_view prediction, std::span<const std::string> golds);

/// True when the normalized text contains any normalized, non-empty gold
/// answer as a substring.
bool contains_answer(std::string_view text, std::span<const std::string> golds);

/// Same predicate with the text already normalized.
bool contains_normalized(std::string_view normalized_text,
                         std::span<const std::string> normalized_golds);

/// Token-set Jaccard similarity (corpus tokenizer, stopwords kept).
double jaccard_similarity(std::string_view a, std::string_view b);

}  // namespace mindstone
