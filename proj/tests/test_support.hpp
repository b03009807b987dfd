#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mindstone/corpus.hpp"
#include "mindstone/index.hpp"

namespace mindstone::test {

inline std::filesystem::path fixture_dir() { return MINDSTONE_FIXTURE_DIR; }
inline std::filesystem::path tools_dir() { return MINDSTONE_TOOLS_DIR; }
inline std::filesystem::path test_data_dir() { return MINDSTONE_TEST_DATA_DIR; }

/// Shell command running the bundled stub scorer with extra arguments.
inline std::string echo_scorer(const std::string& args = "") {
    std::string cmd = std::string("'") + MINDSTONE_PYTHON + "' '" +
                      (tools_dir() / "echo_scorer.py").string() + "'";
    return args.empty() ? cmd : cmd + " " + args;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("mindstone_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// Untitled one-paragraph documents named d0, d1, ...
inline std::vector<Paragraph> docs(const std::vector<std::string>& bodies) {
    std::vector<Paragraph> out;
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        const auto id = "d" + std::to_string(i);
        out.push_back(Paragraph::with_id(id, id, "", bodies[i], 0));
    }
    return out;
}

inline InvertedIndex index_of(const std::vector<std::string>& bodies,
                              Stopwords stopwords = Stopwords::none(), Bm25Params params = {}) {
    return InvertedIndex::build(docs(bodies), params, std::move(stopwords));
}

inline InvertedIndex f1_index() {
    return InvertedIndex::build(read_paragraphs(fixture_dir() / "f1" / "paragraphs.jsonl"), {},
                                Stopwords::english());
}

/// Reference tokenizer for ASCII text: lowercase, split on non-alphanumerics.
inline std::vector<std::string> ascii_terms(const std::string& text, const Stopwords& stop) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && !stop.contains(cur)) out.push_back(cur);
        cur.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

/// Exhaustive BM25 scorer evaluating every document from raw counts.
class BruteForceBm25 {
  public:
    BruteForceBm25(const std::vector<Paragraph>& paragraphs, const Stopwords& stop, double k1,
                   double b)
        : k1_(k1), b_(b) {
        double total = 0.0;
        for (const auto& p : paragraphs) {
            ids_.push_back(p.para_id);
            std::map<std::string, int> tf;
            const auto terms = ascii_terms(p.full_text, stop);
            for (const auto& t : terms) ++tf[t];
            len_.push_back(static_cast<double>(terms.size()));
            total += static_cast<double>(terms.size());
            for (const auto& [t, c] : tf) ++df_[t];
            tf_.push_back(std::move(tf));
        }
        avg_ = paragraphs.empty() ? 0.0 : total / static_cast<double>(paragraphs.size());
    }

    double idf(const std::string& term) const {
        const double n = static_cast<double>(ids_.size());
        auto it = df_.find(term);
        const double df = it == df_.end() ? 0.0 : it->second;
        return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    }

    double term_score(const std::string& term, std::size_t doc) const {
        auto it = tf_[doc].find(term);
        if (it == tf_[doc].end()) return 0.0;
        const double tf = it->second;
        const double denom = tf + k1_ * (1.0 - b_ + b_ * len_[doc] / avg_);
        return idf(term) * tf * (k1_ + 1.0) / denom;
    }

    /// Weighted query: sum of weight * bm25 over terms, all documents scored.
    std::vector<std::pair<std::string, double>> rank(const std::map<std::string, double>& query,
                                                     std::size_t n) const {
        std::vector<std::pair<std::string, double>> all;
        for (std::size_t d = 0; d < ids_.size(); ++d) {
            double s = 0.0;
            for (const auto& [t, w] : query) s += w * term_score(t, d);
            if (s > 0.0) all.emplace_back(ids_[d], s);
        }
        std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
            if (x.second != y.second) return x.second > y.second;
            return x.first < y.first;
        });
        if (all.size() > n) all.resize(n);
        return all;
    }

    /// Query as raw text: term multiplicity is the weight.
    std::vector<std::pair<std::string, double>> rank_text(const std::string& question,
                                                          const Stopwords& stop,
                                                          std::size_t n) const {
        std::map<std::string, double> q;
        for (const auto& t : ascii_terms(question, stop)) q[t] += 1.0;
        return rank(q, n);
    }

  private:
    double k1_;
    double b_;
    std::vector<std::string> ids_;
    std::vector<std::map<std::string, int>> tf_;
    std::vector<double> len_;
    std::map<std::string, int> df_;
    double avg_ = 0.0;
};

inline bool close_rel(double a, double b, double rel = 1e-9) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace mindstone::test
