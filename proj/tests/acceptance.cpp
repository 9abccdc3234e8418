// End-to-end acceptance checklist. Each check prints one PASS/FAIL line;
// the exit code is the number of failures. Tolerances and budgets are
// pinned here on purpose: loosening them is a behavior change, not a tweak.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "fnce/data_io.hpp"
#include "fnce/metrics.hpp"
#include "fnce/objective.hpp"
#include "fnce/reports.hpp"
#include "fnce/rng.hpp"
#include "fnce/similarity.hpp"
#include "fnce/sweep.hpp"
#include "fnce/trainer.hpp"

namespace {

using namespace fnce;
using Clock = std::chrono::steady_clock;

int failures = 0;
int check_no = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(bool pass, const std::string& name, const std::string& detail) {
    std::printf("[%2d/11] %s  %s (%s)\n", ++check_no, pass ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double rel(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

// 1. Analytic gradients agree with central differences across the full
//    hyperparameter grid on random instances, under a wall-clock budget.
void check_gradients() {
    static const double kTaus[] = {0.03, 0.05, 0.07, 0.1, 0.5};
    static const double kMs[] = {0.0, 0.1, 0.3, 1.0};
    const auto t0 = Clock::now();
    Rng rng(42);
    double worst = 0.0;
    for (std::size_t t = 0; t < 100; ++t) {
        const std::size_t n = 2 + std::size_t(rng.uniform_below(63));
        const std::size_t d = 4 + std::size_t(rng.uniform_below(125));
        const LossConfig cfg = LossConfig::make(LossKind::FocalInfoNCE, kTaus[t % 5], kMs[t % 4]);
        const SimilarityMatrix sim = random_similarity_instance(n, d, cfg, rng);
        const GradReport rep =
            compare_gradients(loss_gradient(sim, cfg), finite_diff_gradient(sim, cfg, 3e-5));
        worst = std::max(worst, rep.max_rel_err);
    }
    const double secs = seconds_since(t0);
    report(worst < 1e-5 && secs < 30.0, "gradients match central differences",
           fmt("100 instances, max rel err %.3e < 1e-5, %.1f s < 30 s", worst, secs));
}

// 2. The log-sum-exp evaluation of the modulated loss matches a naive
//    direct evaluation of the same formula.
void check_naive_equivalence() {
    static const double kTaus[] = {0.03, 0.05, 0.07, 0.1, 0.5};
    static const double kMs[] = {0.0, 0.1, 0.3, 1.0};
    Rng rng(7);
    double worst = 0.0;
    for (std::size_t t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + std::size_t(rng.uniform_below(7));
        const std::size_t d = 4 + std::size_t(rng.uniform_below(13));
        const LossConfig cfg = LossConfig::make(LossKind::FocalInfoNCE, kTaus[t % 5], kMs[t % 4]);
        const SimilarityMatrix sim = random_similarity_instance(n, d, cfg, rng);
        const LossValue stable = focal_info_nce(sim, cfg);
        double naive_total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double denom = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double g = i == j ? sim.at(i, j) * sim.at(i, j)
                                        : effective_logit(sim.at(i, j), cfg.m);
                denom += std::exp(g / cfg.tau);
            }
            const double naive_i =
                std::log(denom) - sim.at(i, i) * sim.at(i, i) / cfg.tau;
            worst = std::max(worst, rel(stable.per_sample[i], naive_i));
            naive_total += naive_i;
        }
        worst = std::max(worst, rel(stable.total, naive_total));
    }
    report(worst < 1e-10, "stable loss matches naive evaluation",
           fmt("1000 instances, max rel err %.3e < 1e-10", worst));
}

// 3. The reweighting curve crosses the identity exactly at s = 1 - m and
//    on no other side of it.
void check_crossover() {
    double worst_cross = 0.0;
    std::size_t sign_violations = 0;
    for (double m : {0.1, 0.2, 0.3, 0.4}) {
        const double s_star = 1.0 - m;
        worst_cross = std::max(worst_cross, std::abs(effective_logit(s_star, m) - s_star));
        for (int k = 1; k <= 10000; ++k) {
            const double s = double(k) / 10000.0;
            const double lhs = effective_logit(s, m) - s;
            const double rhs = s - s_star;
            const bool agree =
                lhs * rhs > 0.0 || (std::abs(lhs) <= 1e-12 && std::abs(rhs) <= 1e-12);
            if (!agree) ++sign_violations;
        }
    }
    report(worst_cross <= 1e-12 && sign_violations == 0, "reweighting crosses identity at 1 - m",
           fmt("crossover err %.3e <= 1e-12, %zu sign violations on 4 x 10^4 grid", worst_cross,
               sign_violations));
}

// 4. A single-row batch carries no signal: zero loss, zero gradient.
void check_single_row() {
    double worst_loss = 0.0, worst_grad = 0.0;
    for (LossKind kind : {LossKind::InfoNCE, LossKind::FocalInfoNCE}) {
        for (double s : {1.0, 0.73}) {
            const LossConfig cfg = LossConfig::make(kind, 0.05, 0.3);
            SimilarityMatrix sim(1);
            sim.at(0, 0) = s;
            worst_loss = std::max(worst_loss, std::abs(loss(sim, cfg).total));
            worst_grad = std::max(worst_grad, std::abs(loss_gradient(sim, cfg).at(0, 0)));
        }
    }
    report(worst_loss <= 1e-12 && worst_grad <= 1e-12, "single-row batch is a no-op",
           fmt("|loss| %.3e, |grad| %.3e, both <= 1e-12", worst_loss, worst_grad));
}

std::vector<double> oracle_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::sort(order.begin(), order.end(),
              [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double oracle_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) ma += a[i], mb += b[i];
    ma /= double(n), mb /= double(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// 5. Library spearman equals rank-then-pearson done by hand, ties included.
void check_spearman_oracle() {
    Rng rng(11);
    double worst = 0.0;
    std::size_t done = 0;
    while (done < 1000) {
        const std::size_t n = 2 + std::size_t(rng.uniform_below(40));
        std::vector<double> pred(n), gold(n);
        // Alternate continuous draws with small integers so ties are common.
        const bool coarse = done % 2 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = coarse ? double(rng.uniform_below(7)) : rng.normal();
            gold[i] = coarse ? double(rng.uniform_below(7)) : rng.normal();
        }
        const auto constant = [](const std::vector<double>& v) {
            return std::all_of(v.begin(), v.end(), [&v](double x) { return x == v[0]; });
        };
        if (constant(pred) || constant(gold)) continue;
        const double lib = spearman(pred, gold);
        const double ora = oracle_pearson(oracle_ranks(pred), oracle_ranks(gold));
        worst = std::max(worst, std::abs(lib - ora));
        ++done;
    }
    report(worst <= 1e-12, "spearman matches a rank-then-pearson oracle",
           fmt("1000 vectors with ties, max abs err %.3e <= 1e-12", worst));
}

// 6. Metric anchor points: self-alignment is zero, and two antipodal unit
//    vectors have uniformity exactly -8.
void check_metric_anchors() {
    Rng rng(13);
    EmbeddingBatch a(6, 5);
    for (double& v : a.data) v = rng.normal();
    a = normalize_rows(a);
    const double self_align = alignment(a, a);

    EmbeddingBatch pair(2, 5);
    for (std::size_t k = 0; k < 5; ++k) {
        pair.at(0, k) = a.at(0, k);
        pair.at(1, k) = -a.at(0, k);
    }
    const double u = uniformity(pair);
    report(std::abs(self_align) <= 1e-12 && std::abs(u - -8.0) <= 1e-12,
           "alignment and uniformity anchors",
           fmt("alignment(a,a) = %.3e, antipodal uniformity err %.3e, both <= 1e-12", self_align,
               std::abs(u - -8.0)));
}

struct SanityOutcome {
    double ratio = 0.0;
    double d_sp = 0.0;
    double d_sn = 0.0;
    std::size_t violations = 0;
};

SanityOutcome run_sanity(LossKind kind) {
    SanityOutcome out;
    double initial = 0.0, final_loss = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const EmbeddingBatch data = synth_anisotropic(10000, 32, 0.8, seed);
        TrainConfig tc;
        tc.loss = LossConfig::make(kind, 0.05, 0.3);
        tc.seed = seed;
        Rng init(seed);
        ProjectionHead head = ProjectionHead::make({data.d, data.d, data.d, data.d}, init);
        const TrainTrace trace = train(head, data, tc);
        initial += trace.rows.front().loss;
        final_loss += trace.rows.back().loss;
        out.d_sp += trace.rows.back().mean_sp - trace.rows.front().mean_sp;
        out.d_sn += trace.rows.back().mean_sn - trace.rows.front().mean_sn;
        out.violations += trace.dominance_violations;
    }
    out.ratio = final_loss / initial;
    out.d_sp /= 5.0;
    out.d_sn /= 5.0;
    return out;
}

// 7 + 8. Training with default settings halves the loss, pulls positives
//    up, pushes negatives down (averaged over 5 seeds, both objectives,
//    under 5 minutes), and never misorders hard-negative gradients.
void check_training_sanity() {
    const auto t0 = Clock::now();
    const SanityOutcome focal = run_sanity(LossKind::FocalInfoNCE);
    const SanityOutcome plain = run_sanity(LossKind::InfoNCE);
    const double secs = seconds_since(t0);
    const bool trends = focal.ratio < 0.5 && focal.d_sp > 0.0 && focal.d_sn < 0.0 &&
                        plain.ratio < 0.5 && plain.d_sp > 0.0 && plain.d_sn < 0.0;
    report(trends && secs < 300.0, "default training improves loss and ordering",
           fmt("loss ratios %.3f / %.3f < 0.5, d_sp %+.4f / %+.4f > 0, d_sn %+.4f / %+.4f < 0, "
               "%.0f s < 300 s",
               focal.ratio, plain.ratio, focal.d_sp, plain.d_sp, focal.d_sn, plain.d_sn, secs));
    report(focal.violations + plain.violations == 0, "hard-negative gradients stay ordered",
           fmt("%zu violations across 10 runs x 500 batches",
               focal.violations + plain.violations));
}

// 9. A temperature sweep produces a complete CSV whose best spearman sits
//    strictly inside the grid for at least 4 of 5 seeds.
void check_sweep_interior() {
    const std::vector<double> taus = {0.03, 0.05, 0.07, 0.1};
    std::size_t interior = 0;
    bool csv_ok = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RunConfig base;
        base.optimizer = OptimizerKind::SGD;
        base.learning_rate = 0.2;
        base.steps = 130;
        base.seed = seed;
        const SweepResult result = run_sweep(base, taus, {0.3});
        const std::string csv = sweep_csv(result);
        std::size_t lines = 0, empties = 0;
        for (std::size_t p = 0; p < csv.size(); ++p) {
            if (csv[p] == '\n') ++lines;
            if (csv[p] == ',' && (p + 1 == csv.size() || csv[p + 1] == ',' || csv[p + 1] == '\n'))
                ++empties;
        }
        csv_ok = csv_ok && lines == taus.size() + 1 && empties == 0;
        std::size_t best = 0;
        for (std::size_t k = 1; k < result.points.size(); ++k)
            if (result.points[k].spearman > result.points[best].spearman) best = k;
        if (best != 0 && best != taus.size() - 1) ++interior;
    }
    report(csv_ok && interior >= 4, "temperature sweep peaks inside the grid",
           fmt("complete CSVs, interior optimum on %zu of 5 seeds (need >= 4)", interior));
}

// 10. Identical configurations produce byte-identical traces.
void check_determinism() {
    const EmbeddingBatch data = synth_anisotropic(10000, 32, 0.8, 42);
    auto one_run = [&data](std::string& trace_text, std::string& head_text) {
        TrainConfig tc;
        Rng init(42);
        ProjectionHead head = ProjectionHead::make({data.d, data.d, data.d, data.d}, init);
        const TrainTrace trace = train(head, data, tc);
        trace_text = trace_csv(trace);
        head_text = head_csv(head);
    };
    std::string trace_a, head_a, trace_b, head_b;
    one_run(trace_a, head_a);
    one_run(trace_b, head_b);
    report(trace_a == trace_b && head_a == head_b && !trace_a.empty(),
           "identical configs train identically",
           fmt("trace %zu bytes and head %zu bytes byte-identical across two runs",
               trace_a.size(), head_a.size()));
}

// 11. The embedding container round-trips bit-exactly and rejects every
//    single-byte header corruption.
void check_store_robustness() {
    Rng rng(21);
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t < 100; ++t) {
        EmbeddingStore store;
        const std::size_t n = 1 + rng.uniform_below(12);
        const std::size_t d = 1 + rng.uniform_below(9);
        store.matrix = EmbeddingBatch(n, d);
        for (double& v : store.matrix.data) v = double(float(rng.normal()));
        for (std::size_t i = 0; i < n; ++i) {
            std::string id = "id" + std::to_string(i) + "_";
            const std::size_t extra = rng.uniform_below(9);
            for (std::size_t k = 0; k < extra; ++k) id += char('a' + rng.uniform_below(26));
            store.ids.push_back(std::move(id));
        }
        const EmbeddingStore back = parse_embeddings(serialize_embeddings(store), "mem");
        if (back.ids != store.ids || back.matrix.data != store.matrix.data ||
            back.matrix.n != store.matrix.n || back.matrix.d != store.matrix.d)
            ++mismatches;
    }

    EmbeddingStore probe;
    probe.matrix = EmbeddingBatch(3, 2);
    for (double& v : probe.matrix.data) v = double(float(rng.normal()));
    probe.ids = {"ax", "by", "cz"};
    const std::string bytes = serialize_embeddings(probe);
    std::size_t accepted = 0;
    for (std::size_t off = 0; off < 20; ++off) {
        for (int alt = 0; alt < 256; ++alt) {
            if (char(alt) == bytes[off]) continue;
            std::string bad = bytes;
            bad[off] = char(alt);
            try {
                (void)parse_embeddings(bad, "mem");
                ++accepted;
            } catch (const ParseError&) {
            }
        }
    }
    report(mismatches == 0 && accepted == 0, "store round-trip and header rejection",
           fmt("%zu round-trip mismatches in 100 stores, %zu of 5100 corruptions accepted",
               mismatches, accepted));
}

}  // namespace

int main() {
    check_gradients();
    check_naive_equivalence();
    check_crossover();
    check_single_row();
    check_spearman_oracle();
    check_metric_anchors();
    check_training_sanity();
    check_sweep_interior();
    check_determinism();
    check_store_robustness();
    if (failures == 0)
        std::printf("acceptance: all 11 checks passed\n");
    else
        std::printf("acceptance: %d of 11 checks FAILED\n", failures);
    return failures;
}
