#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fnce/batch.hpp"
#include "fnce/errors.hpp"

namespace fnce {

struct EvalReport {
    double spearman = 0.0;     // [-1, 1]
    double alignment = 0.0;    // >= 0, lower is better
    double uniformity = 0.0;   // <= 0, lower is better
    std::size_t n_pairs = 0;
};

// Average (fractional) ranks: ties share the mean of the positions they
// occupy, 1-based.
std::vector<double> fractional_ranks(std::span<const double> x);

// Pearson correlation of the fractional ranks. Equals 1 - 6*sum(d^2)/(n(n^2-1))
// when there are no ties. Throws DegenerateInputError for n < 2 or when either
// rank vector has zero variance.
double spearman(std::span<const double> pred, std::span<const double> gold);

// Mean squared distance between paired rows: (1/N) sum_i ||a_i - b_i||^2.
// Rows must be unit norm (deviation beyond 1e-6 rejected).
double alignment(const EmbeddingBatch& a, const EmbeddingBatch& b);

// log( (2/(N(N-1))) sum_{i<j} e^{-2 ||a_i - a_j||^2} ) over unit rows, N >= 2.
// Always <= 0; equals 0 only when every row is identical.
double uniformity(const EmbeddingBatch& a);

}  // namespace fnce
