#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fnce/batch.hpp"
#include "fnce/errors.hpp"
#include "fnce/objective.hpp"

namespace fnce {

// Keyed embedding collection. ids[i] names matrix row i; ids are unique.
struct EmbeddingStore {
    std::vector<std::string> ids;
    EmbeddingBatch matrix;

    // Index of id, or throws DegenerateInputError naming the id.
    std::size_t index_of(const std::string& id) const;
};

struct StsPair {
    std::string id_a;
    std::string id_b;
    double gold = 0.0;     // [0, 5]
    std::size_t line = 0;  // 1-based source line, for diagnostics
};

struct StsPairSet {
    std::vector<StsPair> records;
};

enum class OptimizerKind { SGD, Adam };

// Fully-resolved run settings. Defaults below apply when a key is absent
// from the config file; unknown keys are rejected.
struct RunConfig {
    LossKind loss = LossKind::FocalInfoNCE;
    double tau = 0.05;
    double m = 0.3;
    std::size_t batch_size = 64;
    std::size_t steps = 500;
    double learning_rate = 1e-3;
    double dropout_rate = 0.1;
    std::uint64_t seed = 42;
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::string embeddings_path;  // empty -> synthetic data
    std::string pairs_path;
    std::string out_path;

    LossConfig loss_config() const { return LossConfig::make(loss, tau, m); }
};

// FEMB container: "FEMB" | u32 version=1 | u64 N | u32 d |
// N x [u16 len | id bytes] | N x d float32 row-major. All little-endian.
// Readers must consume the file exactly; trailing bytes are an error.
EmbeddingStore read_embeddings(const std::string& path);
void write_embeddings(const EmbeddingStore& store, const std::string& path);

// Same parsers over in-memory bytes, used by the file functions and by
// corruption tests that never touch disk.
EmbeddingStore parse_embeddings(const std::string& bytes, const std::string& origin);
std::string serialize_embeddings(const EmbeddingStore& store);

// Tab-separated "id_a\tid_b\tgold" lines; '#' lines and blank lines skipped.
StsPairSet read_pairs(const std::string& path);
StsPairSet parse_pairs(const std::string& text, const std::string& origin);

// key=value lines; see RunConfig for the key set and defaults.
RunConfig read_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin);

// Canonical echo of every resolved key, for logs and reproducibility.
std::string resolved_config_text(const RunConfig& cfg);

// Applies the FNCE_SEED environment override, if set. Returns true when the
// seed was replaced. Non-numeric values are a ConfigError.
bool apply_seed_override(RunConfig& cfg);

const char* loss_name(LossKind k);
const char* optimizer_name(OptimizerKind k);

// %.17g rendering used by every CSV writer; round-trips doubles exactly.
std::string format_real(double v);

}  // namespace fnce
