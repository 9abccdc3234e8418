#include "fnce/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fnce/kernels.hpp"

namespace fnce {

namespace {

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw DimensionError("cosine: lengths differ (" + std::to_string(u.size()) +
                             " vs " + std::to_string(v.size()) + ")");
    }
    if (u.empty()) {
        throw DimensionError("cosine: empty input");
    }
    const double uu = kern::dot(u.data(), u.data(), u.size());
    const double vv = kern::dot(v.data(), v.data(), v.size());
    if (uu == 0.0 || vv == 0.0) {
        throw DegenerateInputError("cosine: zero-norm input");
    }
    const double uv = kern::dot(u.data(), v.data(), u.size());
    return clamp_unit(uv / (std::sqrt(uu) * std::sqrt(vv)));
}

SimilarityMatrix similarity_matrix(const EmbeddingBatch& a, const EmbeddingBatch& b) {
    if (a.n != b.n || a.d != b.d) {
        throw DimensionError("similarity_matrix: view shapes differ (" +
                             std::to_string(a.n) + "x" + std::to_string(a.d) + " vs " +
                             std::to_string(b.n) + "x" + std::to_string(b.d) + ")");
    }
    return similarity_matrix_prenormalized(normalize_rows(a), normalize_rows(b));
}

SimilarityMatrix similarity_matrix_prenormalized(const EmbeddingBatch& a,
                                                 const EmbeddingBatch& b) {
    if (a.n != b.n || a.d != b.d) {
        throw DimensionError("similarity_matrix: view shapes differ");
    }
    SimilarityMatrix sim(a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
        double* out = sim.row(i);
        for (std::size_t j = 0; j < a.n; ++j) {
            out[j] = clamp_unit(kern::dot(a.row(i), b.row(j), a.d));
        }
    }
    return sim;
}

double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) {
        throw DomainError("log_sum_exp: empty input");
    }
    const double m = kern::max_value(xs.data(), xs.size());
    double acc = 0.0;
    for (const double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}

}  // namespace fnce
