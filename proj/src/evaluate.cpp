#include "fnce/evaluate.hpp"

#include <unordered_map>

#include "fnce/similarity.hpp"

namespace fnce {

EvalReport evaluate_sts(const EmbeddingStore& store, const StsPairSet& pairs,
                        double positive_threshold) {
    if (pairs.records.size() < 2)
        throw DomainError("evaluate_sts: need at least 2 pairs, got " +
                          std::to_string(pairs.records.size()));
    const std::size_t d = store.matrix.d;

    // Resolve ids once; index_of names any missing id in its error.
    std::unordered_map<std::string, std::size_t> cache;
    auto resolve = [&](const std::string& id) {
        auto it = cache.find(id);
        if (it != cache.end()) return it->second;
        const std::size_t idx = store.index_of(id);
        cache.emplace(id, idx);
        return idx;
    };

    std::vector<double> pred, gold;
    pred.reserve(pairs.records.size());
    gold.reserve(pairs.records.size());
    std::vector<std::size_t> touched;  // first-appearance order
    std::unordered_map<std::size_t, bool> seen;
    for (const auto& rec : pairs.records) {
        const std::size_t ia = resolve(rec.id_a);
        const std::size_t ib = resolve(rec.id_b);
        pred.push_back(cosine(store.matrix.row_span(ia), store.matrix.row_span(ib)));
        gold.push_back(rec.gold);
        for (std::size_t idx : {ia, ib}) {
            if (!seen[idx]) {
                seen[idx] = true;
                touched.push_back(idx);
            }
        }
    }

    EvalReport rep;
    rep.n_pairs = pairs.records.size();
    rep.spearman = spearman(pred, gold);

    EmbeddingBatch dedup(touched.size(), d);
    for (std::size_t k = 0; k < touched.size(); ++k) {
        const double* src = store.matrix.row(touched[k]);
        for (std::size_t j = 0; j < d; ++j) dedup.at(k, j) = src[j];
    }
    const EmbeddingBatch unit = normalize_rows(dedup);
    // A pair set referencing a single id has no spread to measure.
    rep.uniformity = unit.n >= 2 ? uniformity(unit) : 0.0;

    std::vector<double> pos_a, pos_b;
    std::size_t n_pos = 0;
    for (const auto& rec : pairs.records) {
        if (rec.gold < positive_threshold) continue;
        const std::size_t ia = resolve(rec.id_a);
        const std::size_t ib = resolve(rec.id_b);
        const double* ra = store.matrix.row(ia);
        const double* rb = store.matrix.row(ib);
        pos_a.insert(pos_a.end(), ra, ra + d);
        pos_b.insert(pos_b.end(), rb, rb + d);
        ++n_pos;
    }
    if (n_pos > 0) {
        const EmbeddingBatch a = normalize_rows(EmbeddingBatch(n_pos, d, pos_a));
        const EmbeddingBatch b = normalize_rows(EmbeddingBatch(n_pos, d, pos_b));
        rep.alignment = alignment(a, b);
    } else {
        rep.alignment = 0.0;
    }
    return rep;
}

}  // namespace fnce
