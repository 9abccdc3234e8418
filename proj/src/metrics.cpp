#include "fnce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fnce/kernels.hpp"

namespace fnce {
namespace {

void require_unit_rows(const EmbeddingBatch& b, const char* who) {
    for (std::size_t i = 0; i < b.n; ++i) {
        const double nrm2 = kern::dot(b.row(i), b.row(i), b.d);
        if (std::abs(std::sqrt(nrm2) - 1.0) > 1e-6)
            throw DegenerateInputError(std::string(who) + ": row " + std::to_string(i) +
                                       " is not unit norm");
    }
}

}  // namespace

std::vector<double> fractional_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        // Tied block occupies positions i..j (0-based); all get the mean
        // 1-based rank.
        const double r = 0.5 * double(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> pred, std::span<const double> gold) {
    if (pred.size() != gold.size())
        throw DimensionError("spearman: input lengths differ");
    const std::size_t n = pred.size();
    if (n < 2) throw DegenerateInputError("spearman: need at least 2 observations");
    for (std::size_t k = 0; k < n; ++k)
        if (!std::isfinite(pred[k]) || !std::isfinite(gold[k]))
            throw DegenerateInputError("spearman: non-finite input");
    const std::vector<double> ra = fractional_ranks(pred);
    const std::vector<double> rb = fractional_ranks(gold);
    const double mean = 0.5 * double(n + 1);  // ranks always average (n+1)/2
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double da = ra[k] - mean;
        const double db = rb[k] - mean;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw DegenerateInputError("spearman: zero rank variance, correlation undefined");
    return sab / std::sqrt(saa * sbb);
}

double alignment(const EmbeddingBatch& a, const EmbeddingBatch& b) {
    if (a.n != b.n || a.d != b.d) throw DimensionError("alignment: batch shapes differ");
    if (a.n == 0) throw DegenerateInputError("alignment: empty batch");
    require_unit_rows(a, "alignment");
    require_unit_rows(b, "alignment");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.n; ++i)
        acc += kern::squared_distance(a.row(i), b.row(i), a.d);
    return acc / double(a.n);
}

double uniformity(const EmbeddingBatch& a) {
    if (a.n < 2) throw DomainError("uniformity: need at least 2 rows");
    require_unit_rows(a, "uniformity");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t j = i + 1; j < a.n; ++j)
            acc += std::exp(-2.0 * kern::squared_distance(a.row(i), a.row(j), a.d));
    const double pairs = 0.5 * double(a.n) * double(a.n - 1);
    const double val = std::log(acc / pairs);
    // The mean lies in (0,1]; guard against log(1) landing at +eps.
    return std::min(val, 0.0);
}

}  // namespace fnce
