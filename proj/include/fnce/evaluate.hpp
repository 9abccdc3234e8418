#pragma once

#include "fnce/data_io.hpp"
#include "fnce/metrics.hpp"

namespace fnce {

// Scores every pair by cosine of its two store rows, then reports Spearman
// against gold plus alignment/uniformity over the rows the pairs touch
// (deduplicated, row-normalized first). Alignment is restricted to pairs
// whose gold score reaches positive_threshold; with no qualifying pairs it
// is reported as 0. Needs at least 2 pairs.
EvalReport evaluate_sts(const EmbeddingStore& store, const StsPairSet& pairs,
                        double positive_threshold = 4.0);

}  // namespace fnce
