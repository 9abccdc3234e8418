#include "fnce/data_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fnce {
namespace {

static_assert(std::endian::native == std::endian::little,
              "FEMB reader assumes a little-endian host");

constexpr std::uint32_t kFembVersion = 1;

// Sequential reader over an in-memory file image, tracking the byte offset
// for error messages.
struct Cursor {
    const std::string& buf;
    std::size_t off = 0;
    const std::string& origin;

    void need(std::size_t n, const char* what) const {
        if (off + n > buf.size())
            throw ParseError(origin + ": truncated file, needed " + std::to_string(n) +
                             " bytes for " + what + " at offset " + std::to_string(off));
    }
    template <typename T>
    T scalar(const char* what) {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, buf.data() + off, sizeof(T));
        off += sizeof(T);
        return v;
    }
    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string s(buf.data() + off, n);
        off += n;
        return s;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path);
    return std::move(ss).str();
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& what) {
    const char* first = v.data();
    const char* last = v.data() + v.size();
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
        throw ParseError("unparsable number for " + what + ": \"" + v + "\"");
    return out;
}

std::uint64_t parse_u64(const std::string& v, const std::string& what) {
    const char* first = v.data();
    const char* last = v.data() + v.size();
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
        throw ParseError("unparsable integer for " + what + ": \"" + v + "\"");
    return out;
}

}  // namespace

std::size_t EmbeddingStore::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return i;
    throw DegenerateInputError("unknown embedding id \"" + id + "\"");
}

EmbeddingStore parse_embeddings(const std::string& bytes, const std::string& origin) {
    Cursor c{bytes, 0, origin};
    const std::string magic = c.bytes(4, "magic");
    if (magic != "FEMB") throw ParseError(origin + ": bad magic at offset 0");
    const auto version = c.scalar<std::uint32_t>("version");
    if (version != kFembVersion)
        throw ParseError(origin + ": unsupported version " + std::to_string(version) +
                         " at offset 4");
    const auto n = c.scalar<std::uint64_t>("row count");
    const auto d = c.scalar<std::uint32_t>("dimension");
    if (n == 0) throw ParseError(origin + ": row count must be positive (offset 8)");
    if (d == 0) throw ParseError(origin + ": dimension must be positive (offset 16)");
    // Each row costs at least 2 id bytes plus d floats; a corrupt count
    // fails here instead of driving a huge allocation.
    const std::size_t remaining = bytes.size() - c.off;
    if (n > remaining / 2 || d > remaining)
        throw ParseError(origin + ": declared size exceeds file (offset 8)");

    EmbeddingStore store;
    store.ids.reserve(n);
    std::unordered_set<std::string> seen;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto len = c.scalar<std::uint16_t>("id length");
        std::string id = c.bytes(len, "id bytes");
        if (!seen.insert(id).second)
            throw ParseError(origin + ": duplicate id \"" + id + "\"");
        store.ids.push_back(std::move(id));
    }
    store.matrix = EmbeddingBatch(n, d);
    for (std::uint64_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < d; ++j) {
            const std::size_t at = c.off;
            const auto f = c.scalar<float>("payload value");
            if (!std::isfinite(f))
                throw ParseError(origin + ": non-finite value in row " + std::to_string(i) +
                                 " at offset " + std::to_string(at));
            store.matrix.at(i, j) = double(f);
        }
    }
    if (c.off != bytes.size())
        throw ParseError(origin + ": " + std::to_string(bytes.size() - c.off) +
                         " trailing bytes after payload (offset " + std::to_string(c.off) + ")");
    return store;
}

std::string serialize_embeddings(const EmbeddingStore& store) {
    if (store.ids.size() != store.matrix.n)
        throw DimensionError("embedding store: id count does not match row count");
    std::unordered_set<std::string> seen;
    for (const auto& id : store.ids) {
        if (id.size() > 0xFFFF)
            throw DomainError("embedding id longer than 65535 bytes: \"" + id.substr(0, 32) +
                              "...\"");
        if (!seen.insert(id).second) throw DomainError("duplicate embedding id \"" + id + "\"");
    }
    std::string out;
    auto put = [&out](const void* p, std::size_t n) {
        out.append(reinterpret_cast<const char*>(p), n);
    };
    out.append("FEMB");
    const std::uint32_t version = kFembVersion;
    const std::uint64_t n = store.matrix.n;
    const std::uint32_t d = std::uint32_t(store.matrix.d);
    put(&version, 4);
    put(&n, 8);
    put(&d, 4);
    for (const auto& id : store.ids) {
        const std::uint16_t len = std::uint16_t(id.size());
        put(&len, 2);
        out.append(id);
    }
    for (double v : store.matrix.data) {
        const float f = float(v);
        put(&f, 4);
    }
    return out;
}

EmbeddingStore read_embeddings(const std::string& path) {
    return parse_embeddings(read_file(path), path);
}

void write_embeddings(const EmbeddingStore& store, const std::string& path) {
    const std::string bytes = serialize_embeddings(store);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw IoError("write failure on " + path);
}

StsPairSet parse_pairs(const std::string& text, const std::string& origin) {
    StsPairSet set;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(lineno) +
                             ": expected id_a<TAB>id_b<TAB>gold");
        StsPair rec;
        rec.id_a = line.substr(0, t1);
        rec.id_b = line.substr(t1 + 1, t2 - t1 - 1);
        rec.line = lineno;
        if (rec.id_a.empty() || rec.id_b.empty())
            throw ParseError(origin + ":" + std::to_string(lineno) + ": empty id");
        const std::string goldstr = line.substr(t2 + 1);
        try {
            rec.gold = parse_double(goldstr, "gold score");
        } catch (const ParseError& e) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!(rec.gold >= 0.0 && rec.gold <= 5.0))
            throw DomainError(origin + ":" + std::to_string(lineno) + ": gold score " + goldstr +
                              " outside [0, 5]");
        set.records.push_back(std::move(rec));
    }
    return set;
}

StsPairSet read_pairs(const std::string& path) { return parse_pairs(read_file(path), path); }

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::unordered_map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, val).second)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key \"" + key +
                              "\"");
    }
    auto take = [&kv](const char* key) -> const std::string* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        return &it->second;
    };
    if (const auto* v = take("loss")) {
        if (*v == "infonce") cfg.loss = LossKind::InfoNCE;
        else if (*v == "focal_infonce") cfg.loss = LossKind::FocalInfoNCE;
        else throw ConfigError(origin + ": loss must be infonce or focal_infonce, got \"" + *v +
                               "\"");
    }
    if (const auto* v = take("tau")) cfg.tau = parse_double(*v, "tau");
    if (const auto* v = take("m")) cfg.m = parse_double(*v, "m");
    if (const auto* v = take("batch_size")) cfg.batch_size = parse_u64(*v, "batch_size");
    if (const auto* v = take("steps")) cfg.steps = parse_u64(*v, "steps");
    if (const auto* v = take("learning_rate"))
        cfg.learning_rate = parse_double(*v, "learning_rate");
    if (const auto* v = take("dropout_rate")) cfg.dropout_rate = parse_double(*v, "dropout_rate");
    if (const auto* v = take("seed")) cfg.seed = parse_u64(*v, "seed");
    if (const auto* v = take("optimizer")) {
        if (*v == "sgd") cfg.optimizer = OptimizerKind::SGD;
        else if (*v == "adam") cfg.optimizer = OptimizerKind::Adam;
        else throw ConfigError(origin + ": optimizer must be sgd or adam, got \"" + *v + "\"");
    }
    if (const auto* v = take("embeddings_path")) cfg.embeddings_path = *v;
    if (const auto* v = take("pairs_path")) cfg.pairs_path = *v;
    if (const auto* v = take("out_path")) cfg.out_path = *v;

    static const char* known[] = {"loss",         "tau",           "m",
                                  "batch_size",   "steps",         "learning_rate",
                                  "dropout_rate", "seed",          "optimizer",
                                  "embeddings_path", "pairs_path", "out_path"};
    for (const auto& [key, val] : kv) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) { ok = true; break; }
        if (!ok) throw ConfigError(origin + ": unknown key \"" + key + "\"");
    }

    if (!(cfg.tau >= 0.001 && cfg.tau <= 10.0))
        throw ConfigError(origin + ": tau must lie in [0.001, 10]");
    if (!(cfg.m >= 0.0 && cfg.m <= 1.0))
        throw ConfigError(origin + ": m must lie in [0, 1]");
    if (cfg.batch_size < 2)
        throw ConfigError(origin + ": batch_size must be at least 2");
    if (!(cfg.learning_rate > 0.0))
        throw ConfigError(origin + ": learning_rate must be positive");
    if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0))
        throw ConfigError(origin + ": dropout_rate must lie in [0, 1)");
    return cfg;
}

RunConfig read_config(const std::string& path) { return parse_config(read_file(path), path); }

std::string format_real(double v) {
    char num[64];
    std::snprintf(num, sizeof num, "%.17g", v);
    return num;
}

std::string resolved_config_text(const RunConfig& cfg) {
    std::ostringstream out;
    auto put_real = [&out](const char* key, double v) {
        out << key << "=" << format_real(v) << "\n";
    };
    out << "loss=" << loss_name(cfg.loss) << "\n";
    put_real("tau", cfg.tau);
    put_real("m", cfg.m);
    out << "batch_size=" << cfg.batch_size << "\n";
    out << "steps=" << cfg.steps << "\n";
    put_real("learning_rate", cfg.learning_rate);
    put_real("dropout_rate", cfg.dropout_rate);
    out << "seed=" << cfg.seed << "\n";
    out << "optimizer=" << optimizer_name(cfg.optimizer) << "\n";
    out << "embeddings_path=" << cfg.embeddings_path << "\n";
    out << "pairs_path=" << cfg.pairs_path << "\n";
    out << "out_path=" << cfg.out_path << "\n";
    return std::move(out).str();
}

bool apply_seed_override(RunConfig& cfg) {
    const char* env = std::getenv("FNCE_SEED");
    if (env == nullptr || *env == '\0') return false;
    cfg.seed = parse_u64(env, "FNCE_SEED");
    return true;
}

const char* loss_name(LossKind k) {
    return k == LossKind::InfoNCE ? "infonce" : "focal_infonce";
}

const char* optimizer_name(OptimizerKind k) {
    return k == OptimizerKind::SGD ? "sgd" : "adam";
}

}  // namespace fnce
