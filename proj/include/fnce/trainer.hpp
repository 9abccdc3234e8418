#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fnce/batch.hpp"
#include "fnce/data_io.hpp"
#include "fnce/objective.hpp"
#include "fnce/rng.hpp"

namespace fnce {

// Affine layer, weights row-major (in x out): y = x W + b.
struct Layer {
    std::vector<double> w;
    std::vector<double> b;
    std::size_t in = 0;
    std::size_t out = 0;
};

// Stack of affine layers with tanh between them; the final layer is linear.
// Output rows are normalized later, at similarity time, not here.
struct ProjectionHead {
    std::vector<Layer> layers;

    std::size_t in_dim() const { return layers.front().in; }
    std::size_t out_dim() const { return layers.back().out; }

    // Xavier-uniform weights, zero biases. dims = {in, hidden..., out}.
    static ProjectionHead make(const std::vector<std::size_t>& dims, Rng& rng);
    // Single linear layer with W = I, b = 0; forward is then the identity.
    static ProjectionHead identity(std::size_t d);
};

// Per-layer gradient buffers, same shapes as the head.
struct ParamGrads {
    std::vector<Layer> layers;
    static ParamGrads zeros_like(const ProjectionHead& head);
};

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    LossConfig loss;
    std::size_t batch_size = 64;
    std::size_t steps = 500;
    double learning_rate = 1e-3;
    double dropout_rate = 0.1;
    std::uint64_t seed = 42;
    OptimizerKind optimizer = OptimizerKind::Adam;
    AdamParams adam;
    std::size_t log_every = 10;  // trace cadence; first and last step always logged

    static TrainConfig from_run(const RunConfig& run);
};

struct TraceRow {
    std::size_t step = 0;  // 1-based
    double loss = 0.0;
    double mean_sp = 0.0;      // mean diagonal similarity (positives)
    double mean_sn = 0.0;      // mean off-diagonal similarity (negatives)
    double alignment = 0.0;    // over the two normalized views
    double uniformity = 0.0;   // over the first normalized view
};

struct TrainTrace {
    std::vector<TraceRow> rows;
    // Batches where some row had negatives with s_a > s_b >= 0 but
    // gradient(a) <= gradient(b); counted on every step.
    std::size_t dominance_violations = 0;
};

// Optimizer accumulators, flat over all parameters in layer order (w then b
// per layer). t counts completed steps.
struct OptState {
    std::size_t t = 0;
    std::vector<double> m;
    std::vector<double> v;
};

// Inverted dropout: entries zeroed with probability rate, survivors scaled
// by 1/(1-rate), masks independent between the two views. rate = 0 returns
// two plain copies.
std::pair<EmbeddingBatch, EmbeddingBatch> dropout_views(const EmbeddingBatch& x, double rate,
                                                        Rng& rng);

EmbeddingBatch forward(const ProjectionHead& head, const EmbeddingBatch& x);

// Loss of the batch through head, normalization, similarity; views already
// dropout-masked. The finite-difference target for end-to-end checks.
double forward_loss(const ProjectionHead& head, const EmbeddingBatch& xa,
                    const EmbeddingBatch& xb, const LossConfig& loss);

// Same forward pass plus analytic parameter gradients (both views, summed
// left to right). Optionally fills the trace row fields and the dominance
// violation count for the batch.
double forward_backward(const ProjectionHead& head, const EmbeddingBatch& xa,
                        const EmbeddingBatch& xb, const LossConfig& loss, ParamGrads& grads,
                        TraceRow* stats = nullptr, std::size_t* violations = nullptr);

// Count of hard-negative ordering violations: pairs of same-row negatives
// with s_a > s_b >= 0 whose gradients are not strictly ordered the same way.
std::size_t dominance_violations(const SimilarityMatrix& sim, const LossGradient& grad);

// One optimizer step on a batch: dropout views, forward/backward, update.
// Throws DivergenceError naming the step when any parameter goes non-finite.
double train_step(ProjectionHead& head, const EmbeddingBatch& batch, const TrainConfig& cfg,
                  Rng& rng, OptState& opt, TraceRow* stats = nullptr,
                  std::size_t* violations = nullptr);

// Full loop: seeded shuffle into minibatches (remainder dropped, reshuffled
// per epoch), cfg.steps steps, trace rows at the configured cadence.
TrainTrace train(ProjectionHead& head, const EmbeddingBatch& data, const TrainConfig& cfg);

// Unit-norm rows with a geometrically decaying covariance spectrum:
// lambda_k = (1 - anisotropy)^k. anisotropy = 0 is isotropic; near 1 the
// cloud collapses toward one direction.
EmbeddingBatch synth_anisotropic(std::size_t n, std::size_t d, double anisotropy,
                                 std::uint64_t seed);

}  // namespace fnce
