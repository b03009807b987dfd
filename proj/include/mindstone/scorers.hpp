#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mindstone/corpus.hpp"

namespace mindstone {

/// Token budgets applied before scoring. Tokens are this library's tokenizer
/// tokens with stopwords counted.
struct TruncationLimits {
    std::size_t ranker_para_tokens = 448;
    std::size_t reader_total_tokens = 384;

    void validate() const;
};

/// A span proposed by a reader, as byte offsets into the text it was given.
struct SpanCandidate {
    std::size_t start = 0;
    std::size_t end = 0;
    double score = 0.0;
};

struct AnswerSpan {
    std::string para_id;
    std::size_t start_char = 0;  // byte offsets into the paragraph's full_text
    std::size_t end_char = 0;
    std::string text;
    double s_reader = 0.0;
};

/// Binary relevance scorer: real-valued logit, > 0 means "contains an answer".
class Ranker {
  public:
    virtual ~Ranker() = default;
    virtual double score(std::string_view question, const Paragraph& paragraph) const = 0;
    virtual std::string descriptor() const = 0;
};

/// Span extractor. Must return at least one span for text with content.
class Reader {
  public:
    virtual ~Reader() = default;
    virtual std::vector<SpanCandidate> spans(std::string_view question,
                                             const Paragraph& paragraph,
                                             std::size_t k) const = 0;
    virtual std::string descriptor() const = 0;
};

/// Copy of `p` whose full_text keeps only its first `max_tokens` tokens.
Paragraph truncate_paragraph(const Paragraph& p, std::size_t max_tokens);

/// S_ranker with the paragraph truncated to limits.ranker_para_tokens first.
double rank(const Ranker& ranker, std::string_view question, const Paragraph& paragraph,
            const TruncationLimits& limits);

/// Up to k spans sorted by S_reader descending (ties by earlier start). The
/// paragraph is truncated so question + paragraph fit reader_total_tokens.
/// Throws StageError("read") when the reader violates its contract.
std::vector<AnswerSpan> read(const Reader& reader, std::string_view question,
                             const Paragraph& paragraph, std::size_t k,
                             const TruncationLimits& limits);

class ConstantRanker final : public Ranker {
  public:
    explicit ConstantRanker(double value = 0.0) : value_(value) {}
    double score(std::string_view, const Paragraph&) const override { return value_; }
    std::string descriptor() const override;

  private:
    double value_;
};

/// Gold answers keyed by question text; used by the oracle scorers.
using AnswerKey = std::map<std::string, std::vector<std::string>, std::less<>>;

/// +1 when the paragraph contains a gold answer of the question, else -1.
class OracleRanker final : public Ranker {
  public:
    explicit OracleRanker(AnswerKey key) : key_(std::move(key)) {}
    double score(std::string_view question, const Paragraph& paragraph) const override;
    std::string descriptor() const override { return "oracle"; }

  private:
    AnswerKey key_;
};

/// Returns the first occurrence of a gold answer (score 1), falling back to
/// the first token (score 0).
class OracleReader final : public Reader {
  public:
    explicit OracleReader(AnswerKey key) : key_(std::move(key)) {}
    std::vector<SpanCandidate> spans(std::string_view question, const Paragraph& paragraph,
                                     std::size_t k) const override;
    std::string descriptor() const override { return "oracle"; }

  private:
    AnswerKey key_;
};

}  // namespace mindstone
