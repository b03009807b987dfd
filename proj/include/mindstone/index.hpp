#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mindstone/corpus.hpp"
#include "mindstone/text.hpp"

namespace mindstone {

/// Okapi BM25 free parameters; defaults follow Anserini.
struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    void validate() const;
};

/// Sparse term -> weight map. Iteration is in ascending term order, which is
/// also the canonical summation order used by the scorers.
class QueryVector {
  public:
    using Map = std::map<std::string, double, std::less<>>;

    QueryVector() = default;

    /// Sets a weight; a zero weight removes the term.
    void set(std::string term, double weight);
    void add(const std::string& term, double weight);
    double get(std::string_view term) const;
    /// Drops entries whose weight became exactly zero.
    void prune_zeros();

    bool empty() const noexcept { return weights_.empty(); }
    std::size_t size() const noexcept { return weights_.size(); }
    const Map& weights() const noexcept { return weights_; }
    auto begin() const noexcept { return weights_.begin(); }
    auto end() const noexcept { return weights_.end(); }

    friend bool operator==(const QueryVector&, const QueryVector&) = default;

  private:
    Map weights_;
};

struct ScoredParagraph {
    std::string para_id;
    double score = 0.0;

    friend bool operator==(const ScoredParagraph&, const ScoredParagraph&) = default;
};

/// Sorted by score descending, ties by para_id ascending.
struct RetrievalResult {
    std::vector<ScoredParagraph> hits;
    QueryVector query_echo;
};

struct Posting {
    std::uint32_t doc;
    std::uint32_t tf;
};

/// Immutable inverted index over title-prepended paragraphs.
///
/// Terms are numbered in lexicographic order at build time, postings are
/// sorted by document ordinal, and the per-document forward lists are kept for
/// TF-IDF document vectors. The paragraphs themselves are stored so later
/// stages can fetch text by ordinal or para_id.
class InvertedIndex {
  public:
    using TermId = std::uint32_t;

    static InvertedIndex build(std::vector<Paragraph> paragraphs, const Bm25Params& params,
                               Stopwords stopwords);

    /// Writes manifest.json plus payload files into `dir` (created if needed).
    void save(const std::filesystem::path& dir) const;
    static InvertedIndex load(const std::filesystem::path& dir);

    std::size_t doc_count() const noexcept { return paragraphs_.size(); }
    double avg_doc_len() const noexcept { return avg_doc_len_; }
    const Bm25Params& params() const noexcept { return params_; }
    const Stopwords& stopwords() const noexcept { return stopwords_; }
    std::size_t vocabulary_size() const noexcept { return terms_.size(); }

    std::optional<TermId> term_id(std::string_view term) const;
    const std::string& term(TermId id) const { return terms_.at(id); }
    std::span<const Posting> postings(TermId id) const { return postings_.at(id); }
    std::uint32_t doc_freq(std::string_view term) const;
    std::uint32_t doc_len(std::size_t ordinal) const;
    std::uint32_t term_frequency(TermId id, std::size_t ordinal) const;

    /// Lucene idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
    double idf(std::uint32_t df) const noexcept;
    double idf(std::string_view term) const { return idf(doc_freq(term)); }

    /// BM25 weight of one (tf, doc_len) pair for a term with the given idf.
    double bm25_weight(double idf, std::uint32_t tf, std::uint32_t doc_len) const noexcept;
    double bm25_score(std::string_view term, std::size_t ordinal) const;

    const Paragraph& paragraph(std::size_t ordinal) const { return paragraphs_.at(ordinal); }
    const std::vector<Paragraph>& paragraphs() const noexcept { return paragraphs_; }
    std::optional<std::size_t> ordinal(std::string_view para_id) const;
    const Paragraph& paragraph(std::string_view para_id) const;

    /// (term, tf) pairs of a document in term order.
    std::span<const std::pair<TermId, std::uint32_t>> forward(std::size_t ordinal) const {
        return forward_.at(ordinal);
    }

    /// FNV-1a checksum over the logical content (params, stopwords, doc
    /// table, postings). Equal for logically identical indexes.
    std::string checksum() const;

  private:
    InvertedIndex() = default;
    void finish();

    Bm25Params params_;
    Stopwords stopwords_;
    std::vector<Paragraph> paragraphs_;
    std::unordered_map<std::string, std::size_t> ordinal_by_id_;
    std::vector<std::string> terms_;
    std::unordered_map<std::string, TermId> term_ids_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::uint32_t> doc_len_;
    std::vector<std::vector<std::pair<TermId, std::uint32_t>>> forward_;
    double avg_doc_len_ = 0.0;
};

/// q[t] = tf(t, question) for the question's indexable terms.
QueryVector question_term_counts(const InvertedIndex& index, std::string_view question);

/// q[t] = tf(t, question) * idf(t): the question in TF-IDF space.
QueryVector question_vector(const InvertedIndex& index, std::string_view question);

RetrievalResult retrieve(const InvertedIndex& index, std::string_view question, std::size_t n);

RetrievalResult retrieve_weighted(const InvertedIndex& index, const QueryVector& query,
                                  std::size_t n);

/// TF-IDF vector of the document's T most frequent terms (ties by term).
QueryVector doc_tfidf_top(const InvertedIndex& index, std::string_view para_id, std::size_t top_t);

/// Manifest fields as stored next to the payload.
struct IndexManifest {
    int format_version = 1;
    Bm25Params params;
    std::string stopword_hash;
    std::size_t doc_count = 0;
    double avg_doc_len = 0.0;
    std::size_t vocabulary_size = 0;
    std::string build_checksum;
};

IndexManifest read_index_manifest(const std::filesystem::path& dir);

}  // namespace mindstone
