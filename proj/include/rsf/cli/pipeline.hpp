#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rsf/cli/config.hpp"
#include "rsf/data/builders.hpp"
#include "rsf/encoders/embedding.hpp"

namespace rsf::cli {

namespace fs = std::filesystem;

inline std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

/// Progress line on stderr; safe to call from worker threads.
inline void log(const std::string& msg) {
    std::lock_guard<std::mutex> lock(log_mutex());
    std::cerr << "[rsf] " << msg << std::endl;
}

/// 64-bit FNV-1a, used to name cache files after their full key.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Filesystem-safe version of an item id or label.
inline std::string sanitize(std::string_view s) {
    std::string out;
    for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.') ? ch : '_';
    return out;
}

/**
 * Seeds of sweep run r. Every component draws from its own substream of
 * derive_seed(base, r), so adding runs never changes earlier ones.
 */
struct RunSeeds {
    std::uint64_t run = 0;
    std::uint64_t encoder = 0;
    std::uint64_t probe = 0;
    std::uint64_t kmeans = 0;
    std::uint64_t order = 0;
    std::uint64_t decoder = 0;
    std::uint64_t tsne = 0;
    std::uint64_t mismatched_encoder = 0;
};

inline RunSeeds run_seeds(std::uint64_t base, int r) {
    RunSeeds s;
    s.run = nn::derive_seed(base, static_cast<std::uint64_t>(r));
    s.encoder = nn::derive_seed(s.run, 0);
    s.probe = nn::derive_seed(s.run, 1);
    s.kmeans = nn::derive_seed(s.run, 2);
    s.order = nn::derive_seed(s.run, 3);
    s.decoder = nn::derive_seed(s.run, 4);
    s.tsne = nn::derive_seed(s.run, 5);
    s.mismatched_encoder = nn::derive_seed(s.run, 6);
    return s;
}

// ------------------------------------------------------------------ datasets

/// Settings that determine the cached clouds; paths are excluded so moving
/// the source files does not invalidate a cache.
inline std::string dataset_key(const DatasetConfig& d) {
    std::string key = std::string(to_string(d.kind)) + ";points=" + std::to_string(d.effective_points()) +
                      ";seed=" + std::to_string(d.seed);
    switch (d.kind) {
        case DatasetKind::MnistPc:
            key += ";train_limit=" + std::to_string(d.train_limit) + ";test_limit=" + std::to_string(d.test_limit) +
                   ";threshold=" + std::to_string(d.threshold);
            break;
        case DatasetKind::Synthetic:
            key += ";train=" + std::to_string(d.per_class_train) + ";test=" + std::to_string(d.per_class_test);
            break;
        case DatasetKind::Mesh:
            key += ";root=" + fs::path(d.mesh_root).filename().string() + ";train=" + std::to_string(d.per_class_train) +
                   ";test=" + std::to_string(d.per_class_test);
            break;
    }
    return key;
}

/// Short readable dataset tag, e.g. "mnist-pc-3f2a9c01".
inline std::string dataset_tag(const DatasetConfig& d) {
    return std::string(to_string(d.kind)) + "-" + hex64(fnv1a64(dataset_key(d))).substr(0, 8);
}

inline fs::path cache_dir(const ExperimentConfig& c) {
    return c.dataset.cache_dir.empty() ? fs::path(c.run.out) / "cache" : fs::path(c.dataset.cache_dir);
}

inline fs::path cache_path(const ExperimentConfig& c, const std::string& split) {
    return cache_dir(c) / (dataset_tag(c.dataset) + "-" + split + ".rsfd");
}

/// Build one split from the configured sources.
inline data::Dataset build_split(const DatasetConfig& d, const std::string& split) {
    const std::uint64_t split_seed = nn::derive_seed(d.seed, split == "train" ? 0 : 1);
    switch (d.kind) {
        case DatasetKind::MnistPc: {
            const fs::path dir(d.mnist_dir);
            const std::string prefix = split == "train" ? "train" : "t10k";
            const std::string images = util::read_file(dir / (prefix + "-images-idx3-ubyte"));
            const std::string labels = util::read_file(dir / (prefix + "-labels-idx1-ubyte"));
            data::MnistSampling sampling;
            sampling.n_points = d.effective_points();
            sampling.threshold = d.threshold;
            return data::build_mnist_pc(images, labels, split, split == "train" ? d.train_limit : d.test_limit, split_seed,
                                        sampling);
        }
        case DatasetKind::Synthetic:
            return data::build_synthetic_shapes(split == "train" ? d.per_class_train : d.per_class_test, split,
                                                d.effective_points(), d.seed);
        case DatasetKind::Mesh:
            return data::build_mesh_dataset(d.mesh_root, "mesh", split, d.effective_points(), split_seed,
                                            split == "train" ? d.per_class_train : d.per_class_test);
    }
    throw InvalidArgument("unsupported dataset kind");
}

/// Read a prepared split; `rotated` applies the per-item rotations.
inline data::Dataset load_split(const ExperimentConfig& c, const std::string& split, bool rotated) {
    const fs::path path = cache_path(c, split);
    if (!fs::exists(path)) {
        throw InvalidArgument("no prepared cache at '" + path.string() + "'; run 'rsf prepare' with the same config first");
    }
    data::Dataset ds = data::read_cache(path);
    if (rotated) ds = data::rotate_dataset(std::move(ds), nn::derive_seed(c.dataset.seed, split == "train" ? 100 : 101));
    return ds;
}

/// Train and test splits, aligned or rotated, loaded on first use.
class SplitStore {
  public:
    explicit SplitStore(const ExperimentConfig& c) : config_(c) {}

    const data::Dataset& get(const std::string& split, bool rotated) {
        std::lock_guard<std::mutex> lock(mutex_);
        const std::size_t slot = (split == "train" ? 0 : 2) + (rotated ? 1 : 0);
        if (!loaded_[slot]) {
            sets_[slot] = load_split(config_, split, rotated);
            loaded_[slot] = true;
        }
        return sets_[slot];
    }

    std::string label(bool rotated) const { return dataset_tag(config_.dataset) + (rotated ? "-rotated" : ""); }

  private:
    const ExperimentConfig& config_;
    std::mutex mutex_;
    data::Dataset sets_[4];
    bool loaded_[4] = {false, false, false, false};
};

// ------------------------------------------------------------------ embeddings

inline fs::path embedding_dir(const ExperimentConfig& c) {
    return c.run.embedding_dir.empty() ? fs::path(c.run.out) / "embeddings" : fs::path(c.run.embedding_dir);
}

/**
 * @brief Embed a split, reusing an earlier result when one exists.
 *
 * Files are named after a hash of everything that determines the matrix
 * (dataset settings, split, rotation, encoder spec with seed, and the batch
 * layout for BN), and the stored provenance is checked on load.
 */
inline encoders::EmbeddingMatrix embed_split(const ExperimentConfig& c, SplitStore& splits, const std::string& split,
                                             bool rotated, const encoders::EncoderSpec& spec, std::uint64_t order_seed) {
    const fs::path dir = embedding_dir(c);
    const bool batch_norm = spec.norm.kind == nn::NormKind::BN;
    const std::size_t batch = batch_norm ? c.run.embed_batch : 1;
    const std::uint64_t order = batch_norm ? order_seed : 0;
    const std::string spec_text = encoders::spec_to_text(spec);
    const std::string dataset = splits.label(rotated);
    const std::string key = dataset_key(c.dataset) + "|" + split + "|" + (rotated ? "rot" : "aligned") + "|" + spec_text +
                            "|" + std::to_string(batch) + "|" + std::to_string(order);
    const fs::path path = dir / (dataset + "-" + split + "-" + encoders::spec_label(spec) + "-" + hex64(fnv1a64(key)) + ".rsfe");
    if (fs::exists(path)) {
        encoders::EmbeddingMatrix cached = encoders::read_embeddings(path);
        if (cached.provenance.encoder_spec == spec_text && cached.provenance.split == split &&
            cached.provenance.dataset == dataset && cached.provenance.batch_size == batch &&
            cached.provenance.order_seed == order) {
            return cached;
        }
    }
    const data::Dataset& ds = splits.get(split, rotated);
    const encoders::EncoderParams params = encoders::build_encoder(spec);
    encoders::EmbeddingMatrix emb = encoders::embed_dataset(params, ds.clouds, batch, order);
    emb.class_names = ds.manifest.class_names;
    emb.provenance.dataset = dataset;
    emb.provenance.split = split;
    nn::require_finite(emb.data, "embeddings");
    encoders::write_embeddings(emb, path);
    return emb;
}

// ------------------------------------------------------------------ parallel map

/**
 * Run fn(0..n-1) on up to `jobs` threads. The first exception is rethrown
 * after all workers stop; remaining tasks are skipped once one fails.
 */
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load()) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace rsf::cli
