#include "fnce/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fnce/kernels.hpp"
#include "fnce/metrics.hpp"
#include "fnce/similarity.hpp"

namespace fnce {
namespace {

void check_dims(const ProjectionHead& head) {
    if (head.layers.empty()) throw DimensionError("projection head has no layers");
    for (std::size_t l = 0; l + 1 < head.layers.size(); ++l)
        if (head.layers[l].out != head.layers[l + 1].in)
            throw DimensionError("projection head: layer " + std::to_string(l) +
                                 " output does not feed layer " + std::to_string(l + 1));
}

// y = x W + b for one row: start from the bias, then rank-1 accumulate.
void affine_row(const double* x, const Layer& lay, double* y) {
    std::copy(lay.b.begin(), lay.b.end(), y);
    for (std::size_t k = 0; k < lay.in; ++k)
        kern::axpy(x[k], lay.w.data() + k * lay.out, y, lay.out);
}

// Activations of every layer for the whole batch, post-nonlinearity.
std::vector<EmbeddingBatch> forward_all(const ProjectionHead& head, const EmbeddingBatch& x) {
    check_dims(head);
    if (x.d != head.in_dim())
        throw DimensionError("forward: input dimension " + std::to_string(x.d) +
                             " does not match head input " + std::to_string(head.in_dim()));
    std::vector<EmbeddingBatch> acts;
    acts.reserve(head.layers.size());
    const EmbeddingBatch* cur = &x;
    for (std::size_t l = 0; l < head.layers.size(); ++l) {
        const Layer& lay = head.layers[l];
        EmbeddingBatch next(cur->n, lay.out);
        for (std::size_t i = 0; i < cur->n; ++i) affine_row(cur->row(i), lay, next.row(i));
        if (l + 1 < head.layers.size())
            for (double& v : next.data) v = std::tanh(v);
        acts.push_back(std::move(next));
        cur = &acts.back();
    }
    return acts;
}

// Gradient through row normalization: for y with unit direction u = y/r,
// dL/dy = (dL/du - (dL/du . u) u) / r.
void backprop_normalize(const EmbeddingBatch& raw, const EmbeddingBatch& unit,
                        const EmbeddingBatch& d_unit, EmbeddingBatch& d_raw) {
    for (std::size_t i = 0; i < raw.n; ++i) {
        const double r = std::sqrt(kern::dot(raw.row(i), raw.row(i), raw.d));
        const double proj = kern::dot(d_unit.row(i), unit.row(i), raw.d);
        double* out = d_raw.row(i);
        const double* du = d_unit.row(i);
        const double* u = unit.row(i);
        for (std::size_t j = 0; j < raw.d; ++j) out[j] = (du[j] - proj * u[j]) / r;
    }
}

// Accumulates parameter gradients for one view given dL/d(output rows).
// Returns nothing; grads are summed in place, rows processed in order.
void backprop_head(const ProjectionHead& head, const EmbeddingBatch& x,
                   const std::vector<EmbeddingBatch>& acts, EmbeddingBatch d_out,
                   ParamGrads& grads) {
    EmbeddingBatch delta = std::move(d_out);
    for (std::size_t l = head.layers.size(); l-- > 0;) {
        const Layer& lay = head.layers[l];
        Layer& g = grads.layers[l];
        const EmbeddingBatch& input = l == 0 ? x : acts[l - 1];
        for (std::size_t i = 0; i < delta.n; ++i) {
            const double* xi = input.row(i);
            const double* di = delta.row(i);
            for (std::size_t k = 0; k < lay.in; ++k)
                kern::axpy(xi[k], di, g.w.data() + k * lay.out, lay.out);
            for (std::size_t j = 0; j < lay.out; ++j) g.b[j] += di[j];
        }
        if (l == 0) break;
        // delta for the layer below: (delta W^T), then through tanh.
        const EmbeddingBatch& below = acts[l - 1];
        EmbeddingBatch prev(delta.n, lay.in);
        for (std::size_t i = 0; i < delta.n; ++i)
            for (std::size_t k = 0; k < lay.in; ++k)
                prev.at(i, k) = kern::dot(delta.row(i), lay.w.data() + k * lay.out, lay.out);
        for (std::size_t idx = 0; idx < prev.data.size(); ++idx) {
            const double a = below.data[idx];
            prev.data[idx] *= 1.0 - a * a;
        }
        delta = std::move(prev);
    }
}

std::size_t param_count(const ProjectionHead& head) {
    std::size_t n = 0;
    for (const Layer& l : head.layers) n += l.w.size() + l.b.size();
    return n;
}

// Applies one SGD or Adam update over all parameters in layer order.
void apply_update(ProjectionHead& head, const ParamGrads& grads, const TrainConfig& cfg,
                  OptState& opt) {
    const std::size_t total = param_count(head);
    if (opt.m.size() != total && cfg.optimizer == OptimizerKind::Adam) {
        opt.m.assign(total, 0.0);
        opt.v.assign(total, 0.0);
    }
    ++opt.t;
    std::size_t cursor = 0;
    auto update_span = [&](double* p, const double* g, std::size_t n) {
        if (cfg.optimizer == OptimizerKind::SGD) {
            kern::axpy(-cfg.learning_rate, g, p, n);
            cursor += n;
            return;
        }
        const AdamParams& a = cfg.adam;
        const double bc1 = 1.0 - std::pow(a.beta1, double(opt.t));
        const double bc2 = 1.0 - std::pow(a.beta2, double(opt.t));
        for (std::size_t i = 0; i < n; ++i) {
            double& m = opt.m[cursor + i];
            double& v = opt.v[cursor + i];
            m = a.beta1 * m + (1.0 - a.beta1) * g[i];
            v = a.beta2 * v + (1.0 - a.beta2) * g[i] * g[i];
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + a.eps);
        }
        cursor += n;
    };
    for (std::size_t l = 0; l < head.layers.size(); ++l) {
        update_span(head.layers[l].w.data(), grads.layers[l].w.data(), head.layers[l].w.size());
        update_span(head.layers[l].b.data(), grads.layers[l].b.data(), head.layers[l].b.size());
    }
}

bool head_finite(const ProjectionHead& head) {
    for (const Layer& l : head.layers) {
        for (double v : l.w)
            if (!std::isfinite(v)) return false;
        for (double v : l.b)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace

ProjectionHead ProjectionHead::make(const std::vector<std::size_t>& dims, Rng& rng) {
    if (dims.size() < 2) throw DimensionError("projection head needs at least one layer");
    constexpr double kNoiseScale = 0.55;
    constexpr double kIdentityGain = 1.0;
    constexpr double kConeBias = 0.3;
    ProjectionHead head;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer lay;
        lay.in = dims[l];
        lay.out = dims[l + 1];
        if (lay.in == 0 || lay.out == 0) throw DimensionError("zero-width layer");
        const double limit = kNoiseScale * std::sqrt(6.0 / double(lay.in + lay.out));
        lay.w.resize(lay.in * lay.out);
        for (double& w : lay.w) w = rng.uniform(-limit, limit);
        // Square layers start as identity plus noise: the head initially
        // reproduces the input geometry while the noise leaves room to learn
        // dropout-robust features.
        if (lay.in == lay.out)
            for (std::size_t i = 0; i < lay.in; ++i) lay.w[i * lay.out + i] += kIdentityGain;
        lay.b.assign(lay.out, 0.0);
        // The final bias starts on a shared direction: the initial output
        // cloud then sits in a narrow cone (anisotropic), the degenerate
        // regime contrastive training is supposed to repair.
        if (l + 2 == dims.size()) {
            const double beta = kConeBias / std::sqrt(double(lay.out));
            for (double& b : lay.b) b = beta;
        }
        head.layers.push_back(std::move(lay));
    }
    return head;
}

ProjectionHead ProjectionHead::identity(std::size_t d) {
    ProjectionHead head;
    Layer lay;
    lay.in = lay.out = d;
    lay.w.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) lay.w[i * d + i] = 1.0;
    lay.b.assign(d, 0.0);
    head.layers.push_back(std::move(lay));
    return head;
}

ParamGrads ParamGrads::zeros_like(const ProjectionHead& head) {
    ParamGrads g;
    for (const Layer& l : head.layers) {
        Layer z;
        z.in = l.in;
        z.out = l.out;
        z.w.assign(l.w.size(), 0.0);
        z.b.assign(l.b.size(), 0.0);
        g.layers.push_back(std::move(z));
    }
    return g;
}

TrainConfig TrainConfig::from_run(const RunConfig& run) {
    TrainConfig cfg;
    cfg.loss = run.loss_config();
    cfg.batch_size = run.batch_size;
    cfg.steps = run.steps;
    cfg.learning_rate = run.learning_rate;
    cfg.dropout_rate = run.dropout_rate;
    cfg.seed = run.seed;
    cfg.optimizer = run.optimizer;
    return cfg;
}

std::pair<EmbeddingBatch, EmbeddingBatch> dropout_views(const EmbeddingBatch& x, double rate,
                                                        Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout rate must lie in [0, 1)");
    if (rate == 0.0) return {x, x};
    const double scale = 1.0 / (1.0 - rate);
    auto draw = [&]() {
        EmbeddingBatch v(x.n, x.d);
        for (std::size_t i = 0; i < x.data.size(); ++i)
            v.data[i] = rng.uniform() < rate ? 0.0 : x.data[i] * scale;
        return v;
    };
    EmbeddingBatch a = draw();
    EmbeddingBatch b = draw();
    return {std::move(a), std::move(b)};
}

EmbeddingBatch forward(const ProjectionHead& head, const EmbeddingBatch& x) {
    auto acts = forward_all(head, x);
    return std::move(acts.back());
}

std::size_t dominance_violations(const SimilarityMatrix& sim, const LossGradient& grad) {
    if (sim.n != grad.n) throw DimensionError("dominance check: shape mismatch");
    std::size_t bad = 0;
    std::vector<std::pair<double, double>> neg;  // (similarity, gradient)
    for (std::size_t i = 0; i < sim.n; ++i) {
        neg.clear();
        for (std::size_t j = 0; j < sim.n; ++j) {
            if (j == i) continue;
            if (sim.at(i, j) >= 0.0) neg.emplace_back(sim.at(i, j), grad.at(i, j));
        }
        std::sort(neg.begin(), neg.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 1; k < neg.size(); ++k)
            if (neg[k].first > neg[k - 1].first && !(neg[k].second > neg[k - 1].second)) ++bad;
    }
    return bad;
}

namespace {

struct BatchPass {
    double loss = 0.0;
    SimilarityMatrix sim;
    LossGradient grad;
};

// Shared forward machinery for loss-only and loss+backward paths.
BatchPass run_forward(const ProjectionHead& head, const EmbeddingBatch& xa,
                      const EmbeddingBatch& xb, const LossConfig& lcfg,
                      std::vector<EmbeddingBatch>* acts_a, std::vector<EmbeddingBatch>* acts_b,
                      EmbeddingBatch* unit_a, EmbeddingBatch* unit_b) {
    if (xa.n != xb.n || xa.d != xb.d) throw DimensionError("view shapes differ");
    std::vector<EmbeddingBatch> fa = forward_all(head, xa);
    std::vector<EmbeddingBatch> fb = forward_all(head, xb);
    EmbeddingBatch ua = normalize_rows(fa.back());
    EmbeddingBatch ub = normalize_rows(fb.back());
    BatchPass pass;
    pass.sim = similarity_matrix_prenormalized(ua, ub);
    pass.loss = loss(pass.sim, lcfg).total;
    if (acts_a) *acts_a = std::move(fa);
    if (acts_b) *acts_b = std::move(fb);
    if (unit_a) *unit_a = std::move(ua);
    if (unit_b) *unit_b = std::move(ub);
    return pass;
}

void fill_stats(const SimilarityMatrix& sim, const EmbeddingBatch& ua, const EmbeddingBatch& ub,
                double loss_total, std::size_t step, TraceRow* stats) {
    if (!stats) return;
    stats->step = step;
    stats->loss = loss_total;
    double sp = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < sim.n; ++i) {
        sp += sim.at(i, i);
        for (std::size_t j = 0; j < sim.n; ++j)
            if (j != i) sn += sim.at(i, j);
    }
    stats->mean_sp = sim.n ? sp / double(sim.n) : 0.0;
    stats->mean_sn = sim.n > 1 ? sn / double(sim.n * (sim.n - 1)) : 0.0;
    stats->alignment = alignment(ua, ub);
    stats->uniformity = sim.n >= 2 ? uniformity(ua) : 0.0;
}

}  // namespace

double forward_loss(const ProjectionHead& head, const EmbeddingBatch& xa,
                    const EmbeddingBatch& xb, const LossConfig& lcfg) {
    return run_forward(head, xa, xb, lcfg, nullptr, nullptr, nullptr, nullptr).loss;
}

double forward_backward(const ProjectionHead& head, const EmbeddingBatch& xa,
                        const EmbeddingBatch& xb, const LossConfig& lcfg, ParamGrads& grads,
                        TraceRow* stats, std::size_t* violations) {
    std::vector<EmbeddingBatch> acts_a, acts_b;
    EmbeddingBatch ua, ub;
    BatchPass pass = run_forward(head, xa, xb, lcfg, &acts_a, &acts_b, &ua, &ub);
    pass.grad = loss_gradient(pass.sim, lcfg);
    const std::size_t n = pass.sim.n;
    const std::size_t d = ua.d;

    // dL/dS flows into both unit views: dUa = G Ub, dUb = G^T Ua.
    EmbeddingBatch d_ua(n, d), d_ub(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            kern::axpy(pass.grad.at(i, j), ub.row(j), d_ua.row(i), d);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            kern::axpy(pass.grad.at(i, j), ua.row(i), d_ub.row(j), d);

    EmbeddingBatch d_raw_a(n, d), d_raw_b(n, d);
    backprop_normalize(acts_a.back(), ua, d_ua, d_raw_a);
    backprop_normalize(acts_b.back(), ub, d_ub, d_raw_b);

    backprop_head(head, xa, acts_a, std::move(d_raw_a), grads);
    backprop_head(head, xb, acts_b, std::move(d_raw_b), grads);

    fill_stats(pass.sim, ua, ub, pass.loss, 0, stats);
    if (violations) *violations = dominance_violations(pass.sim, pass.grad);
    return pass.loss;
}

double train_step(ProjectionHead& head, const EmbeddingBatch& batch, const TrainConfig& cfg,
                  Rng& rng, OptState& opt, TraceRow* stats, std::size_t* violations) {
    if (batch.n < 2) throw DegenerateInputError("train_step: batch must hold at least 2 rows");
    auto [xa, xb] = dropout_views(batch, cfg.dropout_rate, rng);
    ParamGrads grads = ParamGrads::zeros_like(head);
    const double l = forward_backward(head, xa, xb, cfg.loss, grads, stats, violations);
    apply_update(head, grads, cfg, opt);
    if (!head_finite(head))
        throw DivergenceError("non-finite parameter after step " + std::to_string(opt.t),
                              long(opt.t));
    return l;
}

TrainTrace train(ProjectionHead& head, const EmbeddingBatch& data, const TrainConfig& cfg) {
    if (data.n < cfg.batch_size)
        throw DimensionError("train: dataset smaller than one batch");
    if (cfg.batch_size < 2) throw DegenerateInputError("train: batch_size must be at least 2");
    TrainTrace trace;
    Rng rng(cfg.seed);
    OptState opt;
    std::vector<std::size_t> order(data.n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t pos = data.n;  // forces an initial shuffle
    EmbeddingBatch batch(cfg.batch_size, data.d);
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        if (pos + cfg.batch_size > data.n) {
            rng.shuffle(order);
            pos = 0;
        }
        for (std::size_t i = 0; i < cfg.batch_size; ++i) {
            const double* src = data.row(order[pos + i]);
            std::copy(src, src + data.d, batch.row(i));
        }
        pos += cfg.batch_size;
        const bool log = step == 1 || step == cfg.steps ||
                         (cfg.log_every > 0 && step % cfg.log_every == 0);
        TraceRow row;
        std::size_t bad = 0;
        train_step(head, batch, cfg, rng, opt, log ? &row : nullptr, &bad);
        trace.dominance_violations += bad;
        if (log) {
            row.step = step;
            trace.rows.push_back(row);
        }
    }
    return trace;
}

EmbeddingBatch synth_anisotropic(std::size_t n, std::size_t d, double anisotropy,
                                 std::uint64_t seed) {
    if (n < 2 || d < 2) throw DomainError("synth_anisotropic: need n >= 2 and d >= 2");
    if (!(anisotropy >= 0.0 && anisotropy <= 1.0))
        throw DomainError("synth_anisotropic: anisotropy must lie in [0, 1]");
    Rng rng(seed);
    // Geometric covariance spectrum lambda_k = r^k with r = 1 - anisotropy^2:
    // anisotropy 0 keeps the spectrum flat, anisotropy -> 1 collapses it.
    const double ratio = 1.0 - anisotropy * anisotropy;
    std::vector<double> scale(d);
    for (std::size_t k = 0; k < d; ++k) scale[k] = std::pow(ratio, 0.5 * double(k));
    // Random orthogonal basis (modified Gram-Schmidt on a Gaussian matrix):
    // the principal axes of real embedding clouds are not coordinate-aligned,
    // and rotating spreads each principal component across all coordinates.
    std::vector<double> basis(d * d);
    for (double& v : basis) v = rng.normal();
    for (std::size_t j = 0; j < d; ++j) {
        double* qj = basis.data() + j * d;
        for (std::size_t k = 0; k < j; ++k) {
            const double* qk = basis.data() + k * d;
            kern::axpy(-kern::dot(qk, qj, d), qk, qj, d);
        }
        const double norm = std::sqrt(kern::dot(qj, qj, d));
        if (norm < 1e-12) throw DomainError("synth_anisotropic: degenerate basis draw");
        kern::scale(qj, 1.0 / norm, d);
    }
    EmbeddingBatch out(n, d);
    std::vector<double> latent(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) latent[k] = scale[k] * rng.normal();
        double* row = out.row(i);
        std::fill(row, row + d, 0.0);
        for (std::size_t k = 0; k < d; ++k) kern::axpy(latent[k], basis.data() + k * d, row, d);
    }
    return normalize_rows(out);
}

}  // namespace fnce
