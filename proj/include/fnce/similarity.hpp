#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fnce/batch.hpp"
#include "fnce/errors.hpp"

namespace fnce {

// Cosine similarity of two vectors of equal length, clamped to [-1, 1] so
// floating-point drift cannot leak out-of-range values into exp().
// Zero-norm inputs are degenerate.
double cosine(std::span<const double> u, std::span<const double> v);

// N x N cosine similarities between two aligned views. Row i of each view
// holds the two encodings of the same sentence: the diagonal is the
// positive-pair similarity, off-diagonal entries are in-batch negatives.
struct SimilarityMatrix {
    std::vector<double> s;
    std::size_t n = 0;

    SimilarityMatrix() = default;
    explicit SimilarityMatrix(std::size_t n_) : s(n_ * n_, 0.0), n(n_) {}

    double* row(std::size_t i) { return s.data() + i * n; }
    const double* row(std::size_t i) const { return s.data() + i * n; }
    double& at(std::size_t i, std::size_t j) { return s[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return s[i * n + j]; }
};

// Builds the full similarity matrix. Rows are normalized once per batch and
// entries computed as dot products, which matches per-pair cosine to 1e-9
// with far better cache behavior.
SimilarityMatrix similarity_matrix(const EmbeddingBatch& a, const EmbeddingBatch& b);

// As above, but for inputs already normalized to unit rows (skips the
// normalization pass). Entries are still clamped.
SimilarityMatrix similarity_matrix_prenormalized(const EmbeddingBatch& a,
                                                 const EmbeddingBatch& b);

// max(xs) + log(sum(exp(xs - max))). Finite for any finite input.
double log_sum_exp(std::span<const double> xs);

}  // namespace fnce
