#include "mindstone/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "mindstone/errors.hpp"
#include "mindstone/metrics.hpp"
#include "mindstone/parallel.hpp"

namespace mindstone {

void FusionWeights::validate() const {
    if (!(w_retriever >= 0.0 && w_ranker >= 0.0 && w_reader >= 0.0)) {
        throw InvalidArgument("fusion weights must be non-negative");
    }
    if (std::abs(w_retriever + w_ranker + w_reader - 1.0) > 1e-9) {
        throw InvalidArgument("fusion weights must sum to 1");
    }
}

std::vector<double> normalize_scores(std::span<const double> scores) {
    if (scores.empty()) return {};
    const double mx = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out;
    out.reserve(scores.size());
    for (double s : scores) out.push_back(s - mx + 1.0);
    return out;
}

double fuse(const NormalizedScores& n, const FusionWeights& w) noexcept {
    return w.w_retriever * n.retriever + w.w_ranker * n.ranker + w.w_reader * n.reader;
}

std::vector<RankedAnswer> fuse_answers(std::span<const SpanScores> spans, const FusionWeights& w) {
    const auto n = spans.size();
    if (n == 0) return {};
    std::vector<double> r(n), k(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = spans[i].s_retriever;
        k[i] = spans[i].s_ranker;
        d[i] = spans[i].s_reader;
    }
    auto nr = normalize_scores(r);
    auto nk = normalize_scores(k);
    auto nd = normalize_scores(d);

    std::vector<RankedAnswer> all;
    all.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = spans[i];
        all.push_back({s.text, s.para_id, s.start, s.end, s.s_retriever, s.s_ranker, s.s_reader,
                       fuse({nr[i], nk[i], nd[i]}, w)});
    }
    std::stable_sort(all.begin(), all.end(), [](const RankedAnswer& a, const RankedAnswer& b) {
        if (a.fused != b.fused) return a.fused > b.fused;
        if (a.para_id != b.para_id) return a.para_id < b.para_id;
        return a.start < b.start;
    });

    std::vector<RankedAnswer> out;
    std::unordered_set<std::string> seen;
    for (auto& a : all) {
        if (seen.insert(normalize_answer(a.text)).second) out.push_back(std::move(a));
    }
    return out;
}

std::vector<FusionWeights> simplex_grid(double step) {
    if (!(step > 0.0 && step <= 0.5)) throw InvalidArgument("grid_step must be in (0, 0.5]");
    const double inv = 1.0 / step;
    const auto steps = static_cast<long>(std::llround(inv));
    if (std::abs(inv - static_cast<double>(steps)) > 1e-9 * inv) {
        throw InvalidArgument("grid_step must divide 1 evenly");
    }
    std::vector<FusionWeights> out;
    const double s = static_cast<double>(steps);
    for (long i = 0; i <= steps; ++i) {
        for (long j = 0; j <= steps - i; ++j) {
            const long k = steps - i - j;
            out.push_back({static_cast<double>(i) / s, static_cast<double>(j) / s,
                           static_cast<double>(k) / s});
        }
    }
    return out;
}

namespace {

double top1_em(std::span<const TuneItem> dev, const FusionWeights& w) {
    std::size_t hits = 0;
    for (const auto& item : dev) {
        auto answers = fuse_answers(item.spans, w);
        if (!answers.empty() && exact_match(answers.front().text, item.golds)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(dev.size());
}

TuneResult pick_best(std::vector<GridPoint> grid) {
    TuneResult out;
    const GridPoint* best = nullptr;
    for (const auto& g : grid) {
        if (!best || g.em > best->em ||
            (g.em == best->em && (g.weights.w_reader > best->weights.w_reader ||
                                  (g.weights.w_reader == best->weights.w_reader &&
                                   g.weights.w_ranker > best->weights.w_ranker)))) {
            best = &g;
        }
    }
    out.best = best->weights;
    out.best_em = best->em;
    out.grid = std::move(grid);
    return out;
}

}  // namespace

TuneResult tune_weights_serial(std::span<const TuneItem> dev, double step) {
    if (dev.empty()) throw InvalidArgument("tune_weights: empty dev set");
    auto points = simplex_grid(step);
    std::vector<GridPoint> grid;
    grid.reserve(points.size());
    for (const auto& w : points) grid.push_back({w, top1_em(dev, w)});
    return pick_best(std::move(grid));
}

TuneResult tune_weights(std::span<const TuneItem> dev, double step, std::size_t workers) {
    if (dev.empty()) throw InvalidArgument("tune_weights: empty dev set");
    auto points = simplex_grid(step);
    std::vector<GridPoint> grid(points.size());
    parallel_for(points.size(), workers, [&](std::size_t i) {
        grid[i] = {points[i], top1_em(dev, points[i])};
    });
    return pick_best(std::move(grid));
}

std::string tuning_csv(const TuneResult& result) {
    std::string out = "w1,w2,w3,em\n";
    char line[96];
    for (const auto& p : result.grid) {
        std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g,%.6f\n", p.weights.w_retriever,
                      p.weights.w_ranker, p.weights.w_reader, p.em);
        out += line;
    }
    return out;
}

}  // namespace mindstone
