#include "mindstone/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mindstone/errors.hpp"
#include "mindstone/jsonl.hpp"

namespace mindstone {

namespace {

constexpr std::uint32_t kMagic = 0x5849534D;  // "MSIX"
constexpr std::uint32_t kFormatVersion = 1;

struct DocScore {
    std::uint32_t doc;
    double score;
};

RetrievalResult top_n(const InvertedIndex& index, std::vector<DocScore> scored, std::size_t n,
                      QueryVector echo) {
    auto better = [&](const DocScore& a, const DocScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return index.paragraph(a.doc).para_id < index.paragraph(b.doc).para_id;
    };
    n = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n),
                      scored.end(), better);
    RetrievalResult out;
    out.hits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.hits.push_back({index.paragraph(scored[i].doc).para_id, scored[i].score});
    }
    out.query_echo = std::move(echo);
    return out;
}

// Term-at-a-time accumulation. `terms` must be in ascending term order so the
// floating-point summation order is canonical.
std::vector<DocScore> accumulate(const InvertedIndex& index,
                                 const std::vector<std::pair<InvertedIndex::TermId, double>>& terms) {
    std::vector<double> acc(index.doc_count(), 0.0);
    std::vector<std::uint32_t> touched;
    for (auto [tid, qweight] : terms) {
        auto plist = index.postings(tid);
        double idf = index.idf(static_cast<std::uint32_t>(plist.size()));
        for (const auto& p : plist) {
            if (acc[p.doc] == 0.0) touched.push_back(p.doc);
            acc[p.doc] += qweight * index.bm25_weight(idf, p.tf, index.doc_len(p.doc));
        }
    }
    std::vector<DocScore> out;
    out.reserve(touched.size());
    for (auto d : touched) out.push_back({d, acc[d]});
    return out;
}

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw FormatError("truncated index payload");
    return v;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void Bm25Params::validate() const {
    if (!(k1 > 0.0) || !std::isfinite(k1)) throw InvalidArgument("bm25 k1 must be > 0");
    if (!(b >= 0.0 && b <= 1.0)) throw InvalidArgument("bm25 b must be in [0,1]");
}

void QueryVector::set(std::string term, double weight) {
    if (weight == 0.0) {
        weights_.erase(term);
    } else {
        weights_[std::move(term)] = weight;
    }
}

void QueryVector::add(const std::string& term, double weight) { weights_[term] += weight; }

double QueryVector::get(std::string_view term) const {
    auto it = weights_.find(term);
    return it == weights_.end() ? 0.0 : it->second;
}

void QueryVector::prune_zeros() {
    std::erase_if(weights_, [](const auto& kv) { return kv.second == 0.0; });
}

InvertedIndex InvertedIndex::build(std::vector<Paragraph> paragraphs, const Bm25Params& params,
                                   Stopwords stopwords) {
    params.validate();
    InvertedIndex idx;
    idx.params_ = params;
    idx.stopwords_ = std::move(stopwords);

    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
        auto [it, inserted] = idx.ordinal_by_id_.emplace(paragraphs[i].para_id, i);
        if (!inserted) throw BuildError("duplicate para_id: " + paragraphs[i].para_id);
    }
    idx.paragraphs_ = std::move(paragraphs);

    // Per-document term counts, then a lexicographically numbered vocabulary.
    std::vector<std::map<std::string, std::uint32_t>> counts(idx.paragraphs_.size());
    std::map<std::string, std::uint32_t> df;
    idx.doc_len_.resize(idx.paragraphs_.size());
    for (std::size_t d = 0; d < idx.paragraphs_.size(); ++d) {
        auto terms = tokenize(idx.paragraphs_[d].full_text, idx.stopwords_);
        idx.doc_len_[d] = static_cast<std::uint32_t>(terms.size());
        for (auto& t : terms) ++counts[d][std::move(t)];
        for (const auto& [t, tf] : counts[d]) ++df[t];
    }
    idx.terms_.reserve(df.size());
    idx.postings_.resize(df.size());
    for (const auto& [t, n] : df) {
        idx.term_ids_.emplace(t, static_cast<TermId>(idx.terms_.size()));
        idx.postings_[idx.terms_.size()].reserve(n);
        idx.terms_.push_back(t);
    }
    for (std::size_t d = 0; d < counts.size(); ++d) {
        for (const auto& [t, tf] : counts[d]) {
            idx.postings_[idx.term_ids_.at(t)].push_back({static_cast<std::uint32_t>(d), tf});
        }
    }
    idx.finish();
    return idx;
}

void InvertedIndex::finish() {
    forward_.assign(paragraphs_.size(), {});
    for (TermId t = 0; t < postings_.size(); ++t) {
        for (const auto& p : postings_[t]) forward_[p.doc].emplace_back(t, p.tf);
    }
    double total = 0.0;
    for (auto len : doc_len_) total += len;
    avg_doc_len_ = paragraphs_.empty() ? 0.0 : total / static_cast<double>(paragraphs_.size());
}

std::optional<InvertedIndex::TermId> InvertedIndex::term_id(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t InvertedIndex::doc_freq(std::string_view term) const {
    auto id = term_id(term);
    return id ? static_cast<std::uint32_t>(postings_[*id].size()) : 0;
}

std::uint32_t InvertedIndex::doc_len(std::size_t ordinal) const {
    if (ordinal >= doc_len_.size()) {
        throw InvalidArgument("unknown doc ordinal " + std::to_string(ordinal));
    }
    return doc_len_[ordinal];
}

std::uint32_t InvertedIndex::term_frequency(TermId id, std::size_t ordinal) const {
    const auto& plist = postings_.at(id);
    auto it = std::lower_bound(plist.begin(), plist.end(), ordinal,
                               [](const Posting& p, std::size_t d) { return p.doc < d; });
    return (it != plist.end() && it->doc == ordinal) ? it->tf : 0;
}

double InvertedIndex::idf(std::uint32_t df) const noexcept {
    const double n = static_cast<double>(doc_count());
    const double f = static_cast<double>(df);
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

double InvertedIndex::bm25_weight(double idf, std::uint32_t tf,
                                  std::uint32_t doc_len) const noexcept {
    if (tf == 0) return 0.0;
    const double f = static_cast<double>(tf);
    const double norm = 1.0 - params_.b + params_.b * static_cast<double>(doc_len) / avg_doc_len_;
    return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
}

double InvertedIndex::bm25_score(std::string_view term, std::size_t ordinal) const {
    auto len = doc_len(ordinal);
    auto id = term_id(term);
    if (!id) return 0.0;
    auto tf = term_frequency(*id, ordinal);
    return bm25_weight(idf(static_cast<std::uint32_t>(postings_[*id].size())), tf, len);
}

std::optional<std::size_t> InvertedIndex::ordinal(std::string_view para_id) const {
    auto it = ordinal_by_id_.find(std::string(para_id));
    if (it == ordinal_by_id_.end()) return std::nullopt;
    return it->second;
}

const Paragraph& InvertedIndex::paragraph(std::string_view para_id) const {
    auto ord = ordinal(para_id);
    if (!ord) throw InvalidArgument("unknown para_id: " + std::string(para_id));
    return paragraphs_[*ord];
}

std::string InvertedIndex::checksum() const {
    std::uint64_t h = fnv1a64("mindstone-index-v1");
    h = fnv1a64(fmt_double(params_.k1) + "/" + fmt_double(params_.b), h);
    h = fnv1a64(stopwords_.hash(), h);
    for (const auto& p : paragraphs_) {
        h = fnv1a64(p.para_id, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
        h = fnv1a64(p.full_text, h);
        h = fnv1a64(std::string_view("\x1e", 1), h);
    }
    for (TermId t = 0; t < terms_.size(); ++t) {
        h = fnv1a64(terms_[t], h);
        for (const auto& p : postings_[t]) {
            h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&p), sizeof p), h);
        }
    }
    return hex64(h);
}

void InvertedIndex::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_paragraphs(dir / "paragraphs.jsonl", paragraphs_);
    stopwords_.save(dir / "stopwords.txt");
    {
        std::ofstream out(dir / "postings.bin", std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / "postings.bin").string());
        put(out, kMagic);
        put(out, kFormatVersion);
        put<std::uint64_t>(out, paragraphs_.size());
        for (auto len : doc_len_) put(out, len);
        put<std::uint64_t>(out, terms_.size());
        for (TermId t = 0; t < terms_.size(); ++t) {
            put<std::uint32_t>(out, static_cast<std::uint32_t>(terms_[t].size()));
            out.write(terms_[t].data(), static_cast<std::streamsize>(terms_[t].size()));
            put<std::uint32_t>(out, static_cast<std::uint32_t>(postings_[t].size()));
            for (const auto& p : postings_[t]) {
                put(out, p.doc);
                put(out, p.tf);
            }
        }
    }
    nlohmann::ordered_json m;
    m["format_version"] = kFormatVersion;
    m["params"] = {{"k1", params_.k1}, {"b", params_.b}};
    m["stopword_hash"] = stopwords_.hash();
    m["doc_count"] = doc_count();
    m["avg_doc_len"] = avg_doc_len_;
    m["vocabulary_size"] = terms_.size();
    m["build_checksum"] = checksum();
    m["files"] = {"paragraphs.jsonl", "stopwords.txt", "postings.bin"};
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
}

IndexManifest read_index_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw FormatError("missing index manifest in " + dir.string());
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(in);
        IndexManifest out;
        out.format_version = m.at("format_version").get<int>();
        out.params.k1 = m.at("params").at("k1").get<double>();
        out.params.b = m.at("params").at("b").get<double>();
        out.stopword_hash = m.at("stopword_hash").get<std::string>();
        out.doc_count = m.at("doc_count").get<std::size_t>();
        out.avg_doc_len = m.at("avg_doc_len").get<double>();
        out.vocabulary_size = m.at("vocabulary_size").get<std::size_t>();
        out.build_checksum = m.at("build_checksum").get<std::string>();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad index manifest: " + std::string(e.what()));
    }
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& dir) {
    auto manifest = read_index_manifest(dir);
    if (manifest.format_version != static_cast<int>(kFormatVersion)) {
        throw FormatError("unsupported index format_version " +
                          std::to_string(manifest.format_version));
    }
    InvertedIndex idx;
    idx.params_ = manifest.params;
    idx.stopwords_ = Stopwords::load(dir / "stopwords.txt");
    idx.paragraphs_ = read_paragraphs(dir / "paragraphs.jsonl");
    for (std::size_t i = 0; i < idx.paragraphs_.size(); ++i) {
        idx.ordinal_by_id_.emplace(idx.paragraphs_[i].para_id, i);
    }

    std::ifstream in(dir / "postings.bin", std::ios::binary);
    if (!in) throw FormatError("missing postings.bin in " + dir.string());
    if (get<std::uint32_t>(in) != kMagic) throw FormatError("postings.bin: bad magic");
    if (get<std::uint32_t>(in) != kFormatVersion) throw FormatError("postings.bin: bad version");
    auto ndocs = get<std::uint64_t>(in);
    if (ndocs != idx.paragraphs_.size()) throw FormatError("postings.bin: doc count mismatch");
    idx.doc_len_.resize(ndocs);
    for (auto& len : idx.doc_len_) len = get<std::uint32_t>(in);
    auto nterms = get<std::uint64_t>(in);
    idx.terms_.resize(nterms);
    idx.postings_.resize(nterms);
    for (TermId t = 0; t < nterms; ++t) {
        auto len = get<std::uint32_t>(in);
        idx.terms_[t].resize(len);
        in.read(idx.terms_[t].data(), len);
        auto plen = get<std::uint32_t>(in);
        idx.postings_[t].resize(plen);
        for (auto& p : idx.postings_[t]) {
            p.doc = get<std::uint32_t>(in);
            p.tf = get<std::uint32_t>(in);
            if (p.doc >= ndocs) throw FormatError("postings.bin: doc ordinal out of range");
        }
        idx.term_ids_.emplace(idx.terms_[t], t);
    }
    idx.finish();
    if (idx.checksum() != manifest.build_checksum) {
        throw FormatError("index checksum mismatch in " + dir.string());
    }
    return idx;
}

QueryVector question_term_counts(const InvertedIndex& index, std::string_view question) {
    QueryVector q;
    for (const auto& t : tokenize(question, index.stopwords())) q.add(t, 1.0);
    return q;
}

QueryVector question_vector(const InvertedIndex& index, std::string_view question) {
    QueryVector q;
    for (const auto& [t, tf] : question_term_counts(index, question)) {
        q.set(t, tf * index.idf(t));
    }
    return q;
}

RetrievalResult retrieve(const InvertedIndex& index, std::string_view question, std::size_t n) {
    auto counts = question_term_counts(index, question);
    if (n == 0 || counts.empty() || index.doc_count() == 0) return {{}, std::move(counts)};
    std::vector<std::pair<InvertedIndex::TermId, double>> terms;
    for (const auto& [t, qtf] : counts) {
        if (auto id = index.term_id(t)) terms.emplace_back(*id, qtf);
    }
    return top_n(index, accumulate(index, terms), n, std::move(counts));
}

RetrievalResult retrieve_weighted(const InvertedIndex& index, const QueryVector& query,
                                  std::size_t n) {
    double total = 0.0;
    for (const auto& [t, w] : query) {
        if (w > 0.0) total += w;
    }
    if (n == 0 || !(total > 0.0) || index.doc_count() == 0) return {{}, query};
    std::vector<std::pair<InvertedIndex::TermId, double>> terms;
    for (const auto& [t, w] : query) {
        if (w <= 0.0) continue;
        if (auto id = index.term_id(t)) terms.emplace_back(*id, w / total);
    }
    return top_n(index, accumulate(index, terms), n, query);
}

QueryVector doc_tfidf_top(const InvertedIndex& index, std::string_view para_id, std::size_t top_t) {
    auto ord = index.ordinal(para_id);
    if (!ord) throw InvalidArgument("unknown para_id: " + std::string(para_id));
    auto fwd = index.forward(*ord);
    std::vector<std::pair<InvertedIndex::TermId, std::uint32_t>> terms(fwd.begin(), fwd.end());
    // Term ids follow lexicographic order, so comparing ids breaks ties by term.
    auto more_frequent = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    auto keep = std::min(top_t, terms.size());
    std::partial_sort(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(keep), terms.end(),
                      more_frequent);
    QueryVector v;
    for (std::size_t i = 0; i < keep; ++i) {
        auto [tid, tf] = terms[i];
        auto df = static_cast<std::uint32_t>(index.postings(tid).size());
        v.set(index.term(tid), static_cast<double>(tf) * index.idf(df));
    }
    return v;
}

}  // namespace mindstone
