#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fnce/errors.hpp"
#include "fnce/rng.hpp"
#include "fnce/similarity.hpp"

namespace fnce {

enum class LossKind { InfoNCE, FocalInfoNCE };

// Objective selector plus temperature and hardness hyperparameters.
// tau in [0.001, 10], m in [0, 1]; m is ignored for InfoNCE.
struct LossConfig {
    LossKind kind = LossKind::FocalInfoNCE;
    double tau = 0.05;
    double m = 0.3;

    static LossConfig make(LossKind kind, double tau, double m);
};

struct LossValue {
    double total = 0.0;
    std::vector<double> per_sample;
};

// d_s[i][j] = dL/ds[i][j]. Row-major n x n like SimilarityMatrix.
struct LossGradient {
    std::vector<double> d_s;
    std::size_t n = 0;

    LossGradient() = default;
    explicit LossGradient(std::size_t n_) : d_s(n_ * n_, 0.0), n(n_) {}
    double& at(std::size_t i, std::size_t j) { return d_s[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return d_s[i * n + j]; }
};

// Modulated logit g(s) = s*(s + m). For s > 0 this exceeds s exactly when
// s > 1 - m, so negatives above that similarity are up-weighted and the
// rest damped; g(1-m) = 1-m is the crossover.
inline double effective_logit(double s, double m) { return s * (s + m); }

// l_i = -log( exp(s_ii/tau) / sum_j exp(s_ij/tau) ), stable via log_sum_exp.
LossValue info_nce(const SimilarityMatrix& sim, const LossConfig& cfg);

// l_i = -log( exp(s_p^2/tau) / (sum_{j!=i} exp(g(s_n)/tau) + exp(s_p^2/tau)) ).
// The positive logit is s_p squared, i.e. g with m = 0, so the whole row
// reduces to one softmax over modulated logits.
LossValue focal_info_nce(const SimilarityMatrix& sim, const LossConfig& cfg);

// Dispatches on cfg.kind.
LossValue loss(const SimilarityMatrix& sim, const LossConfig& cfg);

// Exact gradient of the selected loss with respect to every similarity
// entry. For the modulated objective this is the chain rule through g:
//   dl_i/ds_ij = (p_ij - [i==j]) * g'(s_ij) / tau,  g'(s) = 2s + m (2s on
// the diagonal), with p the row softmax of the modulated logits.
LossGradient loss_gradient(const SimilarityMatrix& sim, const LossConfig& cfg);

// Central differences on the total loss, one entry at a time:
// (L(s + h e_ij) - L(s - h e_ij)) / (2h). h must lie in [1e-8, 1e-4].
LossGradient finite_diff_gradient(const SimilarityMatrix& sim, const LossConfig& cfg,
                                  double h = 1e-6);

// Central differences of an arbitrary scalar function of the similarity
// matrix; finite_diff_gradient is this applied to the loss. Exposed so the
// differencing machinery itself can be validated on known functions.
LossGradient central_difference(const std::function<double(const SimilarityMatrix&)>& f,
                                const SimilarityMatrix& sim, double h);

// Analytical-vs-numerical comparison. rel_err = |a-f| / max(|a|,|f|,1e-12)
// per entry; passes iff the max stays below 1e-5.
struct GradReport {
    double max_rel_err = 0.0;
    double mean_rel_err = 0.0;
    std::size_t worst_i = 0;
    std::size_t worst_j = 0;
    std::vector<double> rel_err;  // n x n, row-major
    std::size_t n = 0;
    bool pass = true;
};

GradReport grad_check(const SimilarityMatrix& sim, const LossConfig& cfg, double h = 1e-6);

// Same comparison for two precomputed gradients (lets callers inject faults
// or swap either side).
GradReport compare_gradients(const LossGradient& analytic, const LossGradient& numeric);

// Row-summed negative-pair gradient with the modulation factor taken as
// 2*(s + m) instead of the exact 2s + m. Disagrees with finite differences
// whenever m > 0; kept only so the gradcheck CLI can print the two side by
// side. Returns one value per row.
std::vector<double> variant_negative_row_gradient(const SimilarityMatrix& sim,
                                                  const LossConfig& cfg);

// Row sums of the exact off-diagonal gradient, the quantity comparable to
// the variant above.
std::vector<double> exact_negative_row_gradient(const SimilarityMatrix& sim,
                                                const LossConfig& cfg);

// Random n x n similarity instance for gradient checking, seeded from
// embeddings of dimension d. Entries are pulled toward 0.7 until the logit
// spread fits in roughly 4 nats at this tau and m: wider instances push
// softmax tails below the noise floor of central differences, where the
// relative-error comparison is meaningless rather than wrong.
SimilarityMatrix random_similarity_instance(std::size_t n, std::size_t d, const LossConfig& cfg,
                                            Rng& rng);

}  // namespace fnce
