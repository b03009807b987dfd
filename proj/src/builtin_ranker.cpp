#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "mindstone/builtin.hpp"
#include "mindstone/errors.hpp"
#include "mindstone/jsonl.hpp"

namespace mindstone {

RankerFeatures ranker_features(const InvertedIndex& index, std::string_view question,
                               const Paragraph& paragraph) {
    const auto& stop = index.stopwords();
    std::map<std::string, int> qtf;
    for (auto& t : tokenize(question, stop)) ++qtf[std::move(t)];

    std::map<std::string, std::uint32_t> ptf;
    auto pterms = tokenize(paragraph.full_text, stop);
    for (const auto& t : pterms) ++ptf[t];
    const auto plen = static_cast<std::uint32_t>(pterms.size());

    auto title_terms = tokenize(paragraph.title, stop);
    std::set<std::string> title(title_terms.begin(), title_terms.end());

    RankerFeatures f{};
    double covered = 0.0;
    for (const auto& [t, n] : qtf) {
        const double idf = index.idf(t);
        auto it = ptf.find(t);
        if (it != ptf.end()) {
            if (index.avg_doc_len() > 0.0) f[0] += n * index.bm25_weight(idf, it->second, plen);
            covered += 1.0;
            f[2] += idf;
        }
        if (title.count(t)) f[5] += 1.0;
    }
    f[1] = covered;
    f[3] = qtf.empty() ? 0.0 : covered / static_cast<double>(qtf.size());
    f[4] = std::log1p(static_cast<double>(plen));
    return f;
}

double BuiltinRankerModel::logit(const RankerFeatures& f) const noexcept {
    double z = bias;
    for (std::size_t i = 0; i < f.size(); ++i) z += weights[i] * f[i];
    return z;
}

void BuiltinRankerModel::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json j;
    j["feature_spec_version"] = feature_spec_version;
    j["weights"] = weights;
    j["bias"] = bias;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

BuiltinRankerModel BuiltinRankerModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open ranker model " + path.string());
    try {
        auto j = nlohmann::json::parse(in);
        BuiltinRankerModel m;
        m.feature_spec_version = j.at("feature_spec_version").get<int>();
        if (m.feature_spec_version != kFeatureSpecVersion) {
            throw FormatError("unsupported feature_spec_version " +
                              std::to_string(m.feature_spec_version));
        }
        auto w = j.at("weights").get<std::vector<double>>();
        if (w.size() != kRankerFeatureCount) throw FormatError("ranker model: wrong weight count");
        std::copy(w.begin(), w.end(), m.weights.begin());
        m.bias = j.at("bias").get<double>();
        for (double v : m.weights) {
            if (!std::isfinite(v)) throw FormatError("ranker model: non-finite weight");
        }
        if (!std::isfinite(m.bias)) throw FormatError("ranker model: non-finite bias");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad ranker model " + path.string() + ": " + e.what());
    }
}

double BuiltinRanker::score(std::string_view question, const Paragraph& paragraph) const {
    return model_.logit(ranker_features(*index_, question, paragraph));
}

std::string BuiltinRanker::descriptor() const {
    return "builtin-ranker:v" + std::to_string(model_.feature_spec_version);
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double accuracy(const BuiltinRankerModel& m, const std::vector<RankerFeatures>& x,
                const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    if (rows.empty()) return 0.0;
    std::size_t ok = 0;
    for (auto r : rows) ok += ((m.logit(x[r]) > 0.0) == (y[r] == 1)) ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(rows.size());
}

}  // namespace

TrainResult train_builtin_ranker(std::span<const RankExample> dataset, const InvertedIndex& index,
                                 const TrainConfig& config, const BuiltinRankerModel* init) {
    if (dataset.empty()) throw InvalidArgument("train_builtin_ranker: empty dataset");
    bool has_pos = false;
    bool has_neg = false;
    for (const auto& e : dataset) (e.label == 1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
        throw InvalidArgument("train_builtin_ranker: dataset must contain both labels");
    }
    if (!(config.holdout_fraction >= 0.0 && config.holdout_fraction < 1.0)) {
        throw InvalidArgument("train_builtin_ranker: holdout_fraction must be in [0,1)");
    }

    const std::size_t n = dataset.size();
    std::vector<RankerFeatures> x(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = dataset[i];
        auto ord = index.ordinal(e.para_id);
        Paragraph p = ord && index.paragraph(*ord).full_text == e.text
                          ? index.paragraph(*ord)
                          : Paragraph::with_id(e.para_id, "", "", e.text, 0);
        x[i] = ranker_features(index, e.question,
                               truncate_paragraph(p, config.limits.ranker_para_tokens));
        y[i] = e.label;
    }

    // Seeded Fisher-Yates; mt19937_64 output is fully specified, so the split
    // is identical on every platform.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(config.seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    auto n_hold = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(n)));
    if (n_hold >= n) n_hold = n - 1;
    std::vector<std::size_t> hold(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_hold));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_hold), order.end());
    std::sort(hold.begin(), hold.end());
    std::sort(train.begin(), train.end());

    constexpr auto F = kRankerFeatureCount;
    RankerFeatures mean{};
    RankerFeatures scale{};
    for (auto r : train) {
        for (std::size_t k = 0; k < F; ++k) mean[k] += x[r][k];
    }
    for (auto& m : mean) m /= static_cast<double>(train.size());
    for (auto r : train) {
        for (std::size_t k = 0; k < F; ++k) scale[k] += (x[r][k] - mean[k]) * (x[r][k] - mean[k]);
    }
    for (auto& s : scale) {
        s = std::sqrt(s / static_cast<double>(train.size()));
        if (!(s > 1e-12)) s = 1.0;
    }

    // Standardized-space parameters.
    RankerFeatures w{};
    double b = 0.0;
    if (init) {
        b = init->bias;
        for (std::size_t k = 0; k < F; ++k) {
            w[k] = init->weights[k] * scale[k];
            b += init->weights[k] * mean[k];
        }
    }

    std::vector<RankerFeatures> z(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (std::size_t k = 0; k < F; ++k) z[i][k] = (x[train[i]][k] - mean[k]) / scale[k];
    }
    const double inv_n = 1.0 / static_cast<double>(train.size());
    double loss = 0.0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        RankerFeatures grad{};
        double grad_b = 0.0;
        loss = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            double s = b;
            for (std::size_t k = 0; k < F; ++k) s += w[k] * z[i][k];
            const double p = sigmoid(s);
            const double err = p - static_cast<double>(y[train[i]]);
            for (std::size_t k = 0; k < F; ++k) grad[k] += err * z[i][k];
            grad_b += err;
            loss += y[train[i]] ? -std::log(std::max(p, 1e-300)) : -std::log(std::max(1.0 - p, 1e-300));
        }
        for (std::size_t k = 0; k < F; ++k) {
            w[k] -= config.learning_rate * (grad[k] * inv_n + config.l2 * w[k]);
        }
        b -= config.learning_rate * grad_b * inv_n;
        loss *= inv_n;
    }

    TrainResult out;
    out.model.bias = b;
    for (std::size_t k = 0; k < F; ++k) {
        out.model.weights[k] = w[k] / scale[k];
        out.model.bias -= w[k] * mean[k] / scale[k];
    }
    out.report.train_size = train.size();
    out.report.holdout_size = hold.size();
    out.report.train_accuracy = accuracy(out.model, x, y, train);
    out.report.holdout_accuracy = accuracy(out.model, x, y, hold);
    out.report.final_loss = loss;
    return out;
}

}  // namespace mindstone
