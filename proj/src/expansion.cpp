#include "mindstone/expansion.hpp"

#include "mindstone/errors.hpp"

namespace mindstone {

void ExpansionParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("rm3.alpha must be in [0,1]");
}

QueryVector expand_query(const QueryVector& query,
                         std::span<const std::pair<std::string, double>> ranked,
                         const InvertedIndex& index, const ExpansionParams& params) {
    params.validate();
    QueryVector feedback;
    for (const auto& [para_id, s_ranker] : ranked) {
        if (!(s_ranker > 0.0)) continue;
        for (const auto& [t, w] : doc_tfidf_top(index, para_id, params.terms)) {
            feedback.add(t, w);
        }
    }

    QueryVector out;
    const double beta = 1.0 - params.alpha;
    for (const auto& [t, w] : query) out.add(t, params.alpha * w);
    for (const auto& [t, w] : feedback) out.add(t, beta * w);
    out.prune_zeros();
    return out;
}

}  // namespace mindstone
