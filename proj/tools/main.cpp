#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fnce/data_io.hpp"
#include "fnce/evaluate.hpp"
#include "fnce/objective.hpp"
#include "fnce/reports.hpp"
#include "fnce/sweep.hpp"
#include "fnce/trainer.hpp"

namespace {

using namespace fnce;

// Synthetic fallback dataset used when a config names no embeddings file.
constexpr std::size_t kSynthRows = 10000;
constexpr std::size_t kSynthDim = 32;
constexpr double kSynthAnisotropy = 0.8;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_text_file(out_path, text);
    }
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg = read_config(path);
    if (apply_seed_override(cfg))
        std::fprintf(stderr, "seed overridden by FNCE_SEED=%llu\n",
                     (unsigned long long)cfg.seed);
    std::fputs("resolved config:\n", stderr);
    std::fputs(resolved_config_text(cfg).c_str(), stderr);
    return cfg;
}

EmbeddingBatch load_train_data(const RunConfig& cfg) {
    if (cfg.embeddings_path.empty()) {
        std::fprintf(stderr, "no embeddings_path set; using synthetic data (%zu x %zu)\n",
                     kSynthRows, kSynthDim);
        return synth_anisotropic(kSynthRows, kSynthDim, kSynthAnisotropy, cfg.seed);
    }
    return read_embeddings(cfg.embeddings_path).matrix;
}

int cmd_train(const std::string& config_path) {
    const RunConfig cfg = load_config(config_path);
    const EmbeddingBatch data = load_train_data(cfg);
    const TrainConfig tc = TrainConfig::from_run(cfg);
    Rng init(cfg.seed);
    ProjectionHead head = ProjectionHead::make({data.d, data.d, data.d, data.d}, init);
    const TrainTrace trace = train(head, data, tc);

    emit(trace_csv(trace), cfg.out_path);
    if (!cfg.out_path.empty()) {
        write_text_file(cfg.out_path + ".head.csv", head_csv(head));
        std::fprintf(stderr, "trace written to %s, head to %s.head.csv\n",
                     cfg.out_path.c_str(), cfg.out_path.c_str());
    }
    if (!trace.rows.empty()) {
        const TraceRow& last = trace.rows.back();
        std::fprintf(stderr,
                     "final: step=%zu loss=%.6f mean_sp=%.4f mean_sn=%.4f alignment=%.4f "
                     "uniformity=%.4f\n",
                     last.step, last.loss, last.mean_sp, last.mean_sn, last.alignment,
                     last.uniformity);
    }
    std::fprintf(stderr, "hard-negative ordering violations: %zu\n",
                 trace.dominance_violations);
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& head_path) {
    const RunConfig cfg = load_config(config_path);
    if (cfg.embeddings_path.empty()) throw ConfigError("eval requires embeddings_path");
    if (cfg.pairs_path.empty()) throw ConfigError("eval requires pairs_path");
    EmbeddingStore store = read_embeddings(cfg.embeddings_path);
    const StsPairSet pairs = read_pairs(cfg.pairs_path);
    if (!head_path.empty()) {
        const ProjectionHead head = read_head_csv(head_path);
        store.matrix = forward(head, store.matrix);
        std::fprintf(stderr, "embeddings passed through head from %s\n", head_path.c_str());
    }
    const EvalReport rep = evaluate_sts(store, pairs);
    std::fprintf(stderr, "pairs=%zu spearman=%.6f alignment=%.6f uniformity=%.6f\n",
                 rep.n_pairs, rep.spearman, rep.alignment, rep.uniformity);
    emit(eval_csv(rep), cfg.out_path);
    return 0;
}

int cmd_gradcheck(std::size_t n, std::size_t d, std::size_t trials, double tau, double m,
                  std::uint64_t seed, bool inject_fault) {
    // 0 (or negative m) leaves the axis cycling over the standard grid.
    static const double kTaus[] = {0.03, 0.05, 0.07, 0.1, 0.5};
    static const double kMs[] = {0.0, 0.1, 0.3, 1.0};
    Rng rng(seed);
    double worst = 0.0, mean_acc = 0.0, variant_gap = 0.0;
    bool all_pass = true;
    std::printf("trial,n,d,tau,m,max_rel_err,mean_rel_err,pass,variant_row_gap\n");
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t nt = n ? n : 2 + std::size_t(rng.uniform_below(63));
        const std::size_t dt = d ? d : 4 + std::size_t(rng.uniform_below(125));
        const double taut = tau > 0.0 ? tau : kTaus[t % 5];
        const double mt = m >= 0.0 ? m : kMs[t % 4];
        const LossConfig cfg = LossConfig::make(LossKind::FocalInfoNCE, taut, mt);
        const SimilarityMatrix sim = random_similarity_instance(nt, dt, cfg, rng);

        LossGradient analytic = loss_gradient(sim, cfg);
        if (inject_fault && nt >= 2) analytic.at(0, 1) += 1e-3;
        const LossGradient fd = finite_diff_gradient(sim, cfg, 3e-5);
        const GradReport rep = compare_gradients(analytic, fd);

        // Gap between the exact off-diagonal row sums and the row-summed
        // variant that uses 2(s + m) in place of 2s + m.
        const std::vector<double> exact = exact_negative_row_gradient(sim, cfg);
        const std::vector<double> variant = variant_negative_row_gradient(sim, cfg);
        double gap = 0.0;
        for (std::size_t i = 0; i < exact.size(); ++i)
            gap = std::max(gap, std::abs(exact[i] - variant[i]));

        std::printf("%zu,%zu,%zu,%s,%s,%s,%s,%d,%s\n", t, nt, dt, format_real(taut).c_str(),
                    format_real(mt).c_str(), format_real(rep.max_rel_err).c_str(),
                    format_real(rep.mean_rel_err).c_str(), rep.pass ? 1 : 0,
                    format_real(gap).c_str());
        worst = std::max(worst, rep.max_rel_err);
        mean_acc += rep.mean_rel_err;
        variant_gap = std::max(variant_gap, gap);
        all_pass = all_pass && rep.pass;
    }
    std::fprintf(stderr, "gradcheck: %zu trials, max rel err %.3e, mean rel err %.3e -> %s\n",
                 trials, worst, trials ? mean_acc / double(trials) : 0.0,
                 all_pass ? "PASS" : "FAIL");
    std::fprintf(stderr,
                 "row-summed 2(s+m) form vs exact row sums: max abs gap %.3e "
                 "(nonzero whenever m > 0; finite differences side with the exact form)\n",
                 variant_gap);
    return all_pass ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, std::vector<double> taus, std::vector<double> ms) {
    const RunConfig cfg = load_config(config_path);
    if (taus.empty()) taus = {0.03, 0.05, 0.07, 0.1};
    if (ms.empty()) ms = {cfg.m};
    const SweepResult result = run_sweep(cfg, taus, ms);
    emit(sweep_csv(result), cfg.out_path);

    const SweepPoint* best = nullptr;
    for (const SweepPoint& p : result.points) {
        if (std::isnan(p.spearman)) continue;
        if (!best || p.spearman > best->spearman) best = &p;
    }
    if (best)
        std::fprintf(stderr, "best: tau=%g m=%g spearman=%.6f\n", best->tau, best->m,
                     best->spearman);
    return 0;
}

int cmd_reweight_curve(const std::vector<double>& ms, std::size_t resolution,
                       const std::string& out_path) {
    if (resolution < 2) throw ConfigError("resolution must be at least 2");
    for (double m : ms)
        if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("m must lie in [0, 1]");
    std::string csv = "m,s,effective,identity\n";
    for (double m : ms) {
        for (std::size_t t = 0; t < resolution; ++t) {
            const double s = double(t) / double(resolution - 1);
            csv += format_real(m) + "," + format_real(s) + "," +
                   format_real(effective_logit(s, m)) + "," + format_real(s) + "\n";
        }
    }
    emit(csv, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Focal-InfoNCE contrastive objective toolkit"};
    app.require_subcommand(1);

    std::string train_config;
    auto* train_cmd = app.add_subcommand("train", "train a projection head contrastively");
    train_cmd->add_option("--config", train_config, "run configuration file")->required();

    std::string eval_config, eval_head;
    auto* eval_cmd = app.add_subcommand("eval", "score a pair set against gold similarities");
    eval_cmd->add_option("--config", eval_config, "run configuration file")->required();
    eval_cmd->add_option("--head", eval_head, "trained head CSV to apply before scoring");

    std::size_t gc_n = 0, gc_d = 0, gc_trials = 100;
    double gc_tau = 0.0, gc_m = -1.0;
    std::uint64_t gc_seed = 42;
    bool gc_fault = false;
    auto* gc_cmd = app.add_subcommand("gradcheck",
                                      "compare analytic gradients with finite differences");
    gc_cmd->add_option("--n", gc_n, "batch size (0 = random in [2,64] per trial)");
    gc_cmd->add_option("--d", gc_d, "embedding dimension (0 = random in [4,128] per trial)");
    gc_cmd->add_option("--trials", gc_trials, "number of random instances");
    gc_cmd->add_option("--tau", gc_tau, "temperature (0 = cycle the standard grid)");
    gc_cmd->add_option("--m", gc_m, "hardness parameter (negative = cycle the standard grid)");
    gc_cmd->add_option("--seed", gc_seed, "instance generator seed");
    gc_cmd->add_flag("--inject-fault", gc_fault)->group("");

    std::string sweep_config;
    std::vector<double> sweep_taus, sweep_ms;
    auto* sweep_cmd = app.add_subcommand("sweep", "train/evaluate across a hyperparameter grid");
    sweep_cmd->add_option("--config", sweep_config, "base run configuration file")->required();
    sweep_cmd->add_option("--tau", sweep_taus, "temperature grid values");
    sweep_cmd->add_option("--m", sweep_ms, "hardness grid values");

    std::vector<double> curve_ms{0.3};
    std::size_t curve_res = 101;
    std::string curve_out;
    auto* curve_cmd = app.add_subcommand("reweight-curve",
                                         "emit the negative reweighting curve s(s+m)");
    curve_cmd->add_option("--m", curve_ms, "hardness values to tabulate");
    curve_cmd->add_option("--resolution", curve_res, "samples across [0,1]");
    curve_cmd->add_option("--out", curve_out, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(train_cmd)) return cmd_train(train_config);
        if (app.got_subcommand(eval_cmd)) return cmd_eval(eval_config, eval_head);
        if (app.got_subcommand(gc_cmd))
            return cmd_gradcheck(gc_n, gc_d, gc_trials, gc_tau, gc_m, gc_seed, gc_fault);
        if (app.got_subcommand(sweep_cmd)) return cmd_sweep(sweep_config, sweep_taus, sweep_ms);
        if (app.got_subcommand(curve_cmd))
            return cmd_reweight_curve(curve_ms, curve_res, curve_out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const fnce::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
