#include "fnce/objective.hpp"

#include <algorithm>
#include <cmath>

#include "fnce/batch.hpp"

namespace fnce {
namespace {

void validate(const LossConfig& cfg) {
    if (!(cfg.tau >= 0.001 && cfg.tau <= 10.0))
        throw ConfigError("tau must lie in [0.001, 10], got " + std::to_string(cfg.tau));
    if (!(cfg.m >= 0.0 && cfg.m <= 1.0))
        throw ConfigError("m must lie in [0, 1], got " + std::to_string(cfg.m));
}

// Row logits for the selected objective, in j order. For FocalInfoNCE the
// diagonal uses g(s, 0) = s^2, off-diagonal g(s, m).
void row_logits(const SimilarityMatrix& sim, const LossConfig& cfg, std::size_t i,
                std::vector<double>& z) {
    const std::size_t n = sim.n;
    z.resize(n);
    if (cfg.kind == LossKind::InfoNCE) {
        for (std::size_t j = 0; j < n; ++j) z[j] = sim.at(i, j) / cfg.tau;
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            const double s = sim.at(i, j);
            z[j] = effective_logit(s, i == j ? 0.0 : cfg.m) / cfg.tau;
        }
    }
}

LossValue loss_impl(const SimilarityMatrix& sim, const LossConfig& cfg) {
    validate(cfg);
    const std::size_t n = sim.n;
    LossValue out;
    out.per_sample.resize(n);
    std::vector<double> z;
    for (std::size_t i = 0; i < n; ++i) {
        row_logits(sim, cfg, i, z);
        const double lse = log_sum_exp(z);
        // lse >= z[i] always, so l_i >= 0 even in floating point.
        out.per_sample[i] = lse - z[i];
        out.total += out.per_sample[i];
    }
    return out;
}

}  // namespace

LossConfig LossConfig::make(LossKind kind, double tau, double m) {
    LossConfig cfg{kind, tau, m};
    validate(cfg);
    return cfg;
}

LossValue info_nce(const SimilarityMatrix& sim, const LossConfig& cfg) {
    if (cfg.kind != LossKind::InfoNCE) throw ConfigError("info_nce called with wrong loss kind");
    return loss_impl(sim, cfg);
}

LossValue focal_info_nce(const SimilarityMatrix& sim, const LossConfig& cfg) {
    if (cfg.kind != LossKind::FocalInfoNCE)
        throw ConfigError("focal_info_nce called with wrong loss kind");
    return loss_impl(sim, cfg);
}

LossValue loss(const SimilarityMatrix& sim, const LossConfig& cfg) { return loss_impl(sim, cfg); }

LossGradient loss_gradient(const SimilarityMatrix& sim, const LossConfig& cfg) {
    validate(cfg);
    const std::size_t n = sim.n;
    LossGradient grad(n);
    std::vector<double> z;
    for (std::size_t i = 0; i < n; ++i) {
        row_logits(sim, cfg, i, z);
        const double lse = log_sum_exp(z);
        for (std::size_t j = 0; j < n; ++j) {
            const double p = std::exp(z[j] - lse);
            const double delta = (i == j) ? 1.0 : 0.0;
            double gp = 1.0;  // d logit / d s, before 1/tau
            if (cfg.kind == LossKind::FocalInfoNCE) {
                const double s = sim.at(i, j);
                gp = 2.0 * s + (i == j ? 0.0 : cfg.m);
            }
            grad.at(i, j) = (p - delta) * gp / cfg.tau;
        }
    }
    return grad;
}

LossGradient central_difference(const std::function<double(const SimilarityMatrix&)>& f,
                                const SimilarityMatrix& sim, double h) {
    if (!(h > 0.0)) throw DomainError("central_difference step must be positive");
    const std::size_t n = sim.n;
    LossGradient grad(n);
    SimilarityMatrix pert = sim;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double s0 = sim.at(i, j);
            pert.at(i, j) = s0 + h;
            const double up = f(pert);
            pert.at(i, j) = s0 - h;
            const double dn = f(pert);
            pert.at(i, j) = s0;
            grad.at(i, j) = (up - dn) / (2.0 * h);
        }
    }
    return grad;
}

LossGradient finite_diff_gradient(const SimilarityMatrix& sim, const LossConfig& cfg, double h) {
    if (!(h >= 1e-8 && h <= 1e-4))
        throw DomainError("finite difference step must lie in [1e-8, 1e-4]");
    validate(cfg);
    return central_difference(
        [&cfg](const SimilarityMatrix& s) { return loss_impl(s, cfg).total; }, sim, h);
}

GradReport compare_gradients(const LossGradient& analytic, const LossGradient& numeric) {
    if (analytic.n != numeric.n) throw DimensionError("gradient sizes differ");
    const std::size_t n = analytic.n;
    GradReport rep;
    rep.n = n;
    rep.rel_err.resize(n * n, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = analytic.at(i, j);
            const double f = numeric.at(i, j);
            const double denom = std::max({std::abs(a), std::abs(f), 1e-12});
            const double rel = std::abs(a - f) / denom;
            rep.rel_err[i * n + j] = rel;
            sum += rel;
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_i = i;
                rep.worst_j = j;
            }
        }
    }
    rep.mean_rel_err = n ? sum / double(n * n) : 0.0;
    rep.pass = rep.max_rel_err < 1e-5;
    return rep;
}

GradReport grad_check(const SimilarityMatrix& sim, const LossConfig& cfg, double h) {
    return compare_gradients(loss_gradient(sim, cfg), finite_diff_gradient(sim, cfg, h));
}

std::vector<double> variant_negative_row_gradient(const SimilarityMatrix& sim,
                                                  const LossConfig& cfg) {
    validate(cfg);
    const std::size_t n = sim.n;
    std::vector<double> out(n, 0.0);
    std::vector<double> z;
    for (std::size_t i = 0; i < n; ++i) {
        row_logits(sim, cfg, i, z);
        const double lse = log_sum_exp(z);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double s = sim.at(i, j);
            // Row-summed form with modulation factor 2(s + m); disagrees
            // with finite differences whenever m > 0. Diagnostic only.
            acc += (2.0 / cfg.tau) * std::exp(z[j] - lse) * (s + cfg.m);
        }
        out[i] = acc;
    }
    return out;
}

SimilarityMatrix random_similarity_instance(std::size_t n, std::size_t d, const LossConfig& cfg,
                                            Rng& rng) {
    if (n == 0 || d == 0) throw DimensionError("instance needs n >= 1 and d >= 1");
    validate(cfg);
    // Two views scattered around a shared center direction.
    std::vector<double> center(d);
    for (double& c : center) c = rng.normal();
    auto draw_view = [&](std::size_t rows) {
        EmbeddingBatch v(rows, d);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = 0; k < d; ++k) v.at(i, k) = center[k] + 0.5 * rng.normal();
        return v;
    };
    SimilarityMatrix s = similarity_matrix(draw_view(n), draw_view(n));

    double mean = 0.0;
    for (double v : s.s) mean += v;
    mean /= double(s.s.size());
    double spread = 0.0;
    for (double v : s.s) spread = std::max(spread, std::abs(v - mean));
    // Half-width keeping the logit range under ~4 nats: |g(s) - g(0.7)|
    // <= (2 + m) * |s - 0.7| and the InfoNCE logit is 1/tau-Lipschitz.
    const double half = cfg.kind == LossKind::InfoNCE
                            ? std::min(0.25, 2.0 * cfg.tau)
                            : std::min(0.25, 2.0 * cfg.tau / (2.0 + cfg.m));
    const double a = spread > half ? half / spread : 1.0;
    for (double& v : s.s) v = 0.7 + a * (v - mean);
    return s;
}

std::vector<double> exact_negative_row_gradient(const SimilarityMatrix& sim,
                                                const LossConfig& cfg) {
    const LossGradient g = loss_gradient(sim, cfg);
    std::vector<double> out(sim.n, 0.0);
    for (std::size_t i = 0; i < sim.n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < sim.n; ++j)
            if (j != i) acc += g.at(i, j);
        out[i] = acc;
    }
    return out;
}

}  // namespace fnce
