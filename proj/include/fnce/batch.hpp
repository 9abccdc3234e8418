#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fnce/errors.hpp"

namespace fnce {

// Row-major N x d matrix of embeddings, one row per sentence view.
// Doubles throughout; gradient checks need the headroom.
struct EmbeddingBatch {
    std::vector<double> data;
    std::size_t n = 0;
    std::size_t d = 0;

    EmbeddingBatch() = default;
    EmbeddingBatch(std::size_t n_, std::size_t d_) : data(n_ * d_, 0.0), n(n_), d(d_) {}
    EmbeddingBatch(std::size_t n_, std::size_t d_, std::vector<double> values)
        : data(std::move(values)), n(n_), d(d_) {
        if (data.size() != n * d) {
            throw DimensionError("EmbeddingBatch: value count does not match n*d");
        }
    }

    double* row(std::size_t i) { return data.data() + i * d; }
    const double* row(std::size_t i) const { return data.data() + i * d; }
    double& at(std::size_t i, std::size_t j) { return data[i * d + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * d + j]; }
    std::span<const double> row_span(std::size_t i) const { return {row(i), d}; }
};

// Scales every row to unit Euclidean norm. A row of zeros has no direction;
// the error names its index.
EmbeddingBatch normalize_rows(const EmbeddingBatch& b);

// True if every entry is finite.
bool all_finite(const EmbeddingBatch& b);

}  // namespace fnce
