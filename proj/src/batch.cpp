#include "fnce/batch.hpp"

#include <cmath>
#include <string>

#include "fnce/kernels.hpp"

namespace fnce {

EmbeddingBatch normalize_rows(const EmbeddingBatch& b) {
    EmbeddingBatch out = b;
    for (std::size_t i = 0; i < b.n; ++i) {
        const double sq = kern::dot(b.row(i), b.row(i), b.d);
        if (sq == 0.0) {
            throw DegenerateInputError("normalize_rows: row " + std::to_string(i) +
                                       " has zero norm");
        }
        kern::scale(out.row(i), 1.0 / std::sqrt(sq), b.d);
    }
    return out;
}

bool all_finite(const EmbeddingBatch& b) {
    for (const double v : b.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace fnce
