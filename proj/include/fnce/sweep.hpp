#pragma once

#include <string>
#include <vector>

#include "fnce/data_io.hpp"
#include "fnce/trainer.hpp"

namespace fnce {

// Synthetic benchmark with impostor clusters. Gold similarity comes from
// semantic latents (isotropic unit vectors in the trailing coordinates).
// The observed inputs prepend a surface block: rows in the same cluster
// share an anchor direction there (they look alike without being related),
// and every row carries a common cone direction (the whole cloud starts
// compressed). Raw cosine ranks impostor pairs too high; a head trained to
// dissolve the clusters and strip the cone improves the ranking, while one
// trained too hard scrambles the semantic geometry instead.
struct LatentTask {
    EmbeddingBatch inputs;
    std::vector<std::string> ids;
    StsPairSet pairs;
};

// Rows [c*cluster_size, (c+1)*cluster_size) form cluster c. The pair set
// holds floor(in_cluster_fraction * n_pairs) same-cluster pairs (the hard
// negatives) and random distinct pairs for the rest, gold scored on the
// usual 0..5 scale from semantic cosine.
LatentTask make_latent_task(std::size_t n, std::size_t d, std::size_t d_surface,
                            std::size_t cluster_size, double anchor_weight, double cone_weight,
                            double in_cluster_fraction, std::size_t n_pairs, std::uint64_t seed);

struct SweepPoint {
    double tau = 0.0;
    double m = 0.0;
    double final_loss = 0.0;
    // NaN when the grid point had no pair set to evaluate against.
    double spearman = 0.0;
    double alignment = 0.0;
    double uniformity = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;  // grid order: tau outer, m inner
};

// Trains fresh heads per (tau, m) grid point on a single shared dataset
// (same seed everywhere, so rows differ only by hyperparameters) and
// evaluates the trained embeddings. Each grid point averages a few
// replicate trainings that differ only in init and batch stream, which
// keeps the reported metrics from being decided by one lucky trajectory.
// With no embeddings_path in `base` the benchmark above is generated from
// base.seed.
SweepResult run_sweep(const RunConfig& base, const std::vector<double>& taus,
                      const std::vector<double>& ms);

std::string sweep_csv(const SweepResult& result);

}  // namespace fnce
