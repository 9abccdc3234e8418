#include "fnce/sweep.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "fnce/evaluate.hpp"
#include "fnce/kernels.hpp"
#include "fnce/similarity.hpp"

namespace fnce {
namespace {

// Shared benchmark shape for sweeps without an embeddings file.
constexpr std::size_t kSweepRows = 2048;
constexpr std::size_t kSweepDim = 32;
constexpr std::size_t kSurfaceDims = 8;
constexpr std::size_t kClusterSize = 8;
constexpr double kAnchorWeight = 0.8;
constexpr double kConeWeight = 0.7;
constexpr double kInClusterFraction = 0.4;
constexpr std::size_t kSweepPairs = 500;
// Replicate trainings averaged per grid point; seeds are offset so they
// never collide with nearby dataset seeds.
constexpr std::size_t kSweepReplicates = 3;
constexpr std::uint64_t kReplicateStride = 1000003;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void draw_unit(Rng& rng, double* v, std::size_t d) {
    double nrm = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        v[k] = rng.normal();
        nrm += v[k] * v[k];
    }
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) throw DomainError("latent task: degenerate direction draw");
    kern::scale(v, 1.0 / nrm, d);
}

}  // namespace

LatentTask make_latent_task(std::size_t n, std::size_t d, std::size_t d_surface,
                            std::size_t cluster_size, double anchor_weight, double cone_weight,
                            double in_cluster_fraction, std::size_t n_pairs, std::uint64_t seed) {
    if (d_surface < 1 || d < d_surface + 2)
        throw DomainError("latent task: need 1 <= d_surface <= d - 2");
    if (cluster_size < 2) throw DomainError("latent task: cluster_size must be at least 2");
    if (n < 2 * cluster_size) throw DomainError("latent task: need at least two full clusters");
    if (!(anchor_weight >= 0.0) || !(cone_weight >= 0.0))
        throw DomainError("latent task: weights must be non-negative");
    if (!(in_cluster_fraction >= 0.0 && in_cluster_fraction <= 1.0))
        throw DomainError("latent task: in_cluster_fraction must lie in [0, 1]");
    if (n_pairs > n * (n - 1) / 2)
        throw DomainError("latent task: more pairs requested than distinct index pairs");
    const std::size_t full_clusters = n / cluster_size;
    const std::size_t n_in = std::size_t(in_cluster_fraction * double(n_pairs));
    if (n_in > full_clusters * cluster_size * (cluster_size - 1) / 2)
        throw DomainError("latent task: more in-cluster pairs requested than exist");

    Rng rng(seed);
    const std::size_t d_sem = d - d_surface;
    const std::size_t n_clusters = (n + cluster_size - 1) / cluster_size;

    std::vector<double> cone(d_surface);
    draw_unit(rng, cone.data(), d_surface);
    std::vector<double> anchors(n_clusters * d_surface);
    for (std::size_t c = 0; c < n_clusters; ++c)
        draw_unit(rng, anchors.data() + c * d_surface, d_surface);

    EmbeddingBatch sem(n, d_sem);
    for (double& v : sem.data) v = rng.normal();
    const EmbeddingBatch latents = normalize_rows(sem);

    LatentTask task;
    EmbeddingBatch x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* anchor = anchors.data() + (i / cluster_size) * d_surface;
        for (std::size_t k = 0; k < d_surface; ++k)
            x.at(i, k) = anchor_weight * anchor[k] + cone_weight * cone[k];
        for (std::size_t k = 0; k < d_sem; ++k) x.at(i, d_surface + k) = latents.at(i, k);
    }
    task.inputs = normalize_rows(x);

    task.ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) task.ids.push_back("e" + std::to_string(i));

    std::unordered_set<std::uint64_t> seen;
    auto add_pair = [&](std::size_t i, std::size_t j) {
        if (i == j) return;
        if (i > j) std::swap(i, j);
        if (!seen.insert(std::uint64_t(i) * n + j).second) return;
        StsPair rec;
        rec.id_a = task.ids[i];
        rec.id_b = task.ids[j];
        rec.gold = 2.5 * (1.0 + cosine(latents.row_span(i), latents.row_span(j)));
        rec.line = task.pairs.records.size() + 1;
        task.pairs.records.push_back(std::move(rec));
    };
    while (task.pairs.records.size() < n_in) {
        const std::size_t c = rng.uniform_below(full_clusters);
        add_pair(c * cluster_size + rng.uniform_below(cluster_size),
                 c * cluster_size + rng.uniform_below(cluster_size));
    }
    while (task.pairs.records.size() < n_pairs)
        add_pair(rng.uniform_below(n), rng.uniform_below(n));
    return task;
}

SweepResult run_sweep(const RunConfig& base, const std::vector<double>& taus,
                      const std::vector<double>& ms) {
    if (taus.empty() || ms.empty()) throw ConfigError("sweep: empty grid axis");

    EmbeddingBatch inputs;
    std::vector<std::string> ids;
    std::optional<StsPairSet> pairs;
    if (base.embeddings_path.empty()) {
        LatentTask task = make_latent_task(kSweepRows, kSweepDim, kSurfaceDims, kClusterSize,
                                           kAnchorWeight, kConeWeight, kInClusterFraction,
                                           kSweepPairs, base.seed);
        inputs = std::move(task.inputs);
        ids = std::move(task.ids);
        pairs = std::move(task.pairs);
    } else {
        EmbeddingStore store = read_embeddings(base.embeddings_path);
        inputs = std::move(store.matrix);
        ids = std::move(store.ids);
        if (!base.pairs_path.empty()) pairs = read_pairs(base.pairs_path);
    }

    SweepResult result;
    for (double tau : taus) {
        for (double m : ms) {
            SweepPoint point;
            point.tau = tau;
            point.m = m;
            point.final_loss = point.spearman = point.alignment = point.uniformity = 0.0;
            for (std::size_t r = 0; r < kSweepReplicates; ++r) {
                RunConfig pt = base;
                pt.tau = tau;
                pt.m = m;
                pt.seed = base.seed + kReplicateStride * (r + 1);
                TrainConfig cfg = TrainConfig::from_run(pt);
                Rng init(pt.seed);
                ProjectionHead head =
                    ProjectionHead::make({inputs.d, inputs.d, inputs.d}, init);
                TrainTrace trace = train(head, inputs, cfg);

                point.final_loss += trace.rows.empty() ? kNaN : trace.rows.back().loss;
                if (pairs) {
                    EmbeddingStore trained;
                    trained.ids = ids;
                    trained.matrix = forward(head, inputs);
                    const EvalReport rep = evaluate_sts(trained, *pairs);
                    point.spearman += rep.spearman;
                    point.alignment += rep.alignment;
                    point.uniformity += rep.uniformity;
                } else if (!trace.rows.empty()) {
                    point.spearman += kNaN;
                    point.alignment += trace.rows.back().alignment;
                    point.uniformity += trace.rows.back().uniformity;
                } else {
                    point.spearman += kNaN;
                    point.alignment += kNaN;
                    point.uniformity += kNaN;
                }
            }
            point.final_loss /= double(kSweepReplicates);
            point.spearman /= double(kSweepReplicates);
            point.alignment /= double(kSweepReplicates);
            point.uniformity /= double(kSweepReplicates);
            result.points.push_back(point);
        }
    }
    return result;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "tau,m,final_loss,spearman,alignment,uniformity\n";
    auto field = [](double v) { return std::isnan(v) ? std::string() : format_real(v); };
    for (const SweepPoint& p : result.points) {
        out << format_real(p.tau) << "," << format_real(p.m) << "," << field(p.final_loss)
            << "," << field(p.spearman) << "," << field(p.alignment) << ","
            << field(p.uniformity) << "\n";
    }
    return std::move(out).str();
}

}  // namespace fnce
