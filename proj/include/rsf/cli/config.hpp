#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsf/analysis/kmeans.hpp"
#include "rsf/analysis/tsne.hpp"
#include "rsf/decoder/decoder.hpp"
#include "rsf/encoders/spec.hpp"
#include "rsf/probes/probe.hpp"
#include "rsf/util/keyvalue.hpp"

namespace rsf::cli {

using nn::Index;

enum class DatasetKind { MnistPc, Synthetic, Mesh };

inline std::string_view to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::MnistPc: return "mnist-pc";
        case DatasetKind::Synthetic: return "synthetic";
        case DatasetKind::Mesh: return "mesh";
    }
    return "mnist-pc";
}

inline DatasetKind parse_dataset_kind(std::string_view name) {
    if (name == "mnist-pc" || name == "mnist") return DatasetKind::MnistPc;
    if (name == "synthetic" || name == "synthetic-shapes") return DatasetKind::Synthetic;
    if (name == "mesh" || name == "modelnet") return DatasetKind::Mesh;
    throw InvalidArgument("unknown dataset '" + std::string(name) + "' (expected mnist-pc, synthetic or mesh)");
}

/// Where the clouds come from and how they are sampled.
struct DatasetConfig {
    DatasetKind kind = DatasetKind::MnistPc;
    std::string mnist_dir = "data/mnist";
    std::string mesh_root;
    int n_points = 0;               ///< 0 picks 512 for MNIST-PC and 1024 for meshes
    std::size_t train_limit = 0;    ///< MNIST-PC items per split; 0 keeps all
    std::size_t test_limit = 0;
    std::size_t per_class_train = 40;  ///< synthetic shapes; mesh datasets cap per class
    std::size_t per_class_test = 20;
    int threshold = 127;
    std::uint64_t seed = 0;
    bool rotate = false;
    std::string cache_dir;  ///< empty means <out>/cache

    int effective_points() const {
        if (n_points > 0) return n_points;
        return kind == DatasetKind::MnistPc ? 512 : 1024;
    }
};

/// Clustering and t-SNE settings.
struct AnalysisConfig {
    int k = 0;  ///< 0 uses the number of classes
    analysis::KMeansOptions kmeans{};
    analysis::TsneParams tsne{};
    std::size_t tsne_points = 1000;  ///< first N test items are embedded; 0 keeps all
    std::string split = "test";
};

/// Single-category reconstruction experiment.
struct ReconstructConfig {
    int label = 0;  ///< class index whose shapes are reconstructed
    std::size_t n_train = 50;
    std::size_t n_heldout = 10;
    std::size_t n_export = 4;  ///< held-out reconstructions written as XYZ
};

/// Multi-seed sweep and output settings.
struct RunConfig {
    int n_runs = 5;
    std::uint64_t seed = 0;
    std::string out = "out";
    int jobs = 1;
    std::size_t embed_batch = 32;
    std::string embedding_dir;  ///< empty means <out>/embeddings
};

/// Grid overrides for table commands; empty lists use the table defaults.
struct TableConfig {
    std::vector<std::string> families;
    std::vector<std::string> norms;
    std::vector<int> depths;
    std::vector<std::string> probes;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    encoders::EncoderSpec encoder;
    probes::ProbeSpec probe;
    int linclf_epochs = -1;  ///< < 0 falls back to probe.epochs
    int nonlinclf_epochs = -1;
    AnalysisConfig analysis;
    decoder::DecoderSpec decoder;
    ReconstructConfig reconstruct;
    RunConfig run;
    TableConfig table;

    int epochs_for(probes::ProbeKind kind) const {
        const int specific = kind == probes::ProbeKind::LinClf ? linclf_epochs : nonlinclf_epochs;
        return specific >= 0 ? specific : probe.epochs;
    }
};

namespace detail {

inline std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

inline std::string join(const std::vector<Index>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + std::to_string(items[i]);
    return out;
}

inline std::vector<std::string> list(const util::KeyValueConfig& cfg, const std::string& section, const std::string& key) {
    std::vector<std::string> out;
    if (auto v = cfg.get(section, key)) {
        for (auto& item : util::split(*v, ',')) {
            if (!item.empty()) out.push_back(item);
        }
    }
    return out;
}

}  // namespace detail

inline void write_probe_spec(const probes::ProbeSpec& p, util::KeyValueConfig& cfg, const std::string& section = "probe") {
    cfg.set(section, "kind", std::string(probes::to_string(p.kind)));
    cfg.set(section, "hidden", detail::join(p.hidden));
    cfg.set(section, "dropout_p", util::format_double(p.dropout_p));
    cfg.set(section, "leaky_slope", util::format_double(p.leaky_slope));
    cfg.set(section, "bn_momentum", util::format_double(p.bn_momentum));
    cfg.set(section, "bn_epsilon", util::format_double(p.bn_epsilon));
    cfg.set(section, "epochs", std::to_string(p.epochs));
    cfg.set(section, "batch_size", std::to_string(p.batch_size));
    cfg.set(section, "learning_rate", util::format_double(p.adam.learning_rate));
    cfg.set(section, "adam_beta1", util::format_double(p.adam.beta1));
    cfg.set(section, "adam_beta2", util::format_double(p.adam.beta2));
    cfg.set(section, "adam_eps", util::format_double(p.adam.epsilon));
}

inline probes::ProbeSpec read_probe_spec(const util::KeyValueConfig& cfg, const std::string& section = "probe") {
    probes::ProbeSpec p;
    if (auto kind = cfg.get(section, "kind")) p.kind = probes::parse_probe_kind(*kind);
    if (auto hidden = cfg.get(section, "hidden")) {
        p.hidden.clear();
        for (const auto& w : util::split(*hidden, ',')) p.hidden.push_back(util::parse_number<Index>(w, section + ".hidden"));
    }
    p.dropout_p = cfg.get_number<double>(section, "dropout_p", p.dropout_p);
    p.leaky_slope = cfg.get_number<double>(section, "leaky_slope", p.leaky_slope);
    p.bn_momentum = cfg.get_number<double>(section, "bn_momentum", p.bn_momentum);
    p.bn_epsilon = cfg.get_number<double>(section, "bn_epsilon", p.bn_epsilon);
    p.epochs = cfg.get_number<int>(section, "epochs", p.epochs);
    p.batch_size = cfg.get_number<std::size_t>(section, "batch_size", p.batch_size);
    p.adam.learning_rate = cfg.get_number<double>(section, "learning_rate", p.adam.learning_rate);
    p.adam.beta1 = cfg.get_number<double>(section, "adam_beta1", p.adam.beta1);
    p.adam.beta2 = cfg.get_number<double>(section, "adam_beta2", p.adam.beta2);
    p.adam.epsilon = cfg.get_number<double>(section, "adam_eps", p.adam.epsilon);
    probes::ProbeSpec check = p;
    check.n_classes = std::max(check.n_classes, 2);
    probes::validate(check);
    return p;
}

/**
 * @brief Build the effective configuration from `key = value` text.
 *
 * Unknown sections are rejected so that typos surface as input errors.
 */
inline ExperimentConfig read_config(const util::KeyValueConfig& cfg) {
    static const std::vector<std::string> known{"",      "dataset", "encoder",     "probe", "analysis",
                                                "tsne",  "decoder", "reconstruct", "run",   "table"};
    for (const auto& [name, keys] : cfg.sections()) {
        if (std::find(known.begin(), known.end(), name) == known.end()) {
            throw InvalidArgument("unknown config section [" + name + "]");
        }
        if (name.empty() && !keys.empty()) throw InvalidArgument("config keys must appear under a [section] header");
    }
    ExperimentConfig c;

    DatasetConfig& d = c.dataset;
    d.kind = parse_dataset_kind(cfg.get_string("dataset", "name", std::string(to_string(d.kind))));
    d.mnist_dir = cfg.get_string("dataset", "mnist_dir", d.mnist_dir);
    d.mesh_root = cfg.get_string("dataset", "mesh_root", d.mesh_root);
    d.n_points = cfg.get_number<int>("dataset", "n_points", d.n_points);
    d.train_limit = cfg.get_number<std::size_t>("dataset", "train_limit", d.train_limit);
    d.test_limit = cfg.get_number<std::size_t>("dataset", "test_limit", d.test_limit);
    d.per_class_train = cfg.get_number<std::size_t>("dataset", "per_class_train", d.per_class_train);
    d.per_class_test = cfg.get_number<std::size_t>("dataset", "per_class_test", d.per_class_test);
    d.threshold = cfg.get_number<int>("dataset", "threshold", d.threshold);
    d.seed = cfg.get_number<std::uint64_t>("dataset", "seed", d.seed);
    d.rotate = cfg.get_bool("dataset", "rotate", d.rotate);
    d.cache_dir = cfg.get_string("dataset", "cache_dir", d.cache_dir);
    if (d.n_points < 0) throw InvalidArgument("dataset.n_points must be >= 0");
    if (d.threshold < 0 || d.threshold > 254) throw InvalidArgument("dataset.threshold must be in 0..254");
    if (d.kind == DatasetKind::Mesh && d.mesh_root.empty()) throw InvalidArgument("dataset.mesh_root is required for mesh datasets");

    const int input_dim = d.kind == DatasetKind::MnistPc ? 2 : 3;
    util::KeyValueConfig enc = cfg;
    if (!enc.has("encoder", "input_dim")) enc.set("encoder", "input_dim", std::to_string(input_dim));
    c.encoder = encoders::read_spec(enc);
    if (c.encoder.input_dim != input_dim) {
        throw InvalidArgument("encoder.input_dim = " + std::to_string(c.encoder.input_dim) + " but the dataset is " +
                              std::to_string(input_dim) + "-D");
    }

    c.probe = read_probe_spec(cfg);
    c.linclf_epochs = cfg.get_number<int>("probe", "linclf_epochs", c.linclf_epochs);
    c.nonlinclf_epochs = cfg.get_number<int>("probe", "nonlinclf_epochs", c.nonlinclf_epochs);

    AnalysisConfig& a = c.analysis;
    a.k = cfg.get_number<int>("analysis", "k", a.k);
    a.kmeans.n_init = cfg.get_number<int>("analysis", "n_init", a.kmeans.n_init);
    a.kmeans.max_iterations = cfg.get_number<int>("analysis", "max_iterations", a.kmeans.max_iterations);
    a.split = cfg.get_string("analysis", "split", a.split);
    if (a.split != "train" && a.split != "test") throw InvalidArgument("analysis.split must be train or test");
    if (a.k < 0) throw InvalidArgument("analysis.k must be >= 0");
    if (a.kmeans.n_init < 1 || a.kmeans.max_iterations < 1) throw InvalidArgument("k-means n_init and max_iterations must be >= 1");
    a.tsne.perplexity = cfg.get_number<double>("tsne", "perplexity", a.tsne.perplexity);
    a.tsne.iterations = cfg.get_number<int>("tsne", "iterations", a.tsne.iterations);
    a.tsne.learning_rate = cfg.get_number<double>("tsne", "learning_rate", a.tsne.learning_rate);
    a.tsne.early_exaggeration = cfg.get_number<double>("tsne", "early_exaggeration", a.tsne.early_exaggeration);
    a.tsne_points = cfg.get_number<std::size_t>("tsne", "points", a.tsne_points);

    c.decoder = decoder::read_spec(cfg);
    c.reconstruct.label = cfg.get_number<int>("reconstruct", "label", c.reconstruct.label);
    c.reconstruct.n_train = cfg.get_number<std::size_t>("reconstruct", "n_train", c.reconstruct.n_train);
    c.reconstruct.n_heldout = cfg.get_number<std::size_t>("reconstruct", "n_heldout", c.reconstruct.n_heldout);
    c.reconstruct.n_export = cfg.get_number<std::size_t>("reconstruct", "n_export", c.reconstruct.n_export);
    if (c.reconstruct.n_train < 1) throw InvalidArgument("reconstruct.n_train must be >= 1");

    RunConfig& r = c.run;
    r.n_runs = cfg.get_number<int>("run", "n_runs", r.n_runs);
    r.seed = cfg.get_number<std::uint64_t>("run", "seed", r.seed);
    r.out = cfg.get_string("run", "out", r.out);
    r.jobs = cfg.get_number<int>("run", "jobs", r.jobs);
    r.embed_batch = cfg.get_number<std::size_t>("run", "embed_batch", r.embed_batch);
    r.embedding_dir = cfg.get_string("run", "embedding_dir", r.embedding_dir);
    if (r.n_runs < 1) throw InvalidArgument("run.n_runs must be >= 1");
    if (r.jobs < 1) throw InvalidArgument("run.jobs must be >= 1");
    if (r.embed_batch < 1) throw InvalidArgument("run.embed_batch must be >= 1");
    if (c.encoder.norm.kind == nn::NormKind::BN && r.embed_batch < 2) {
        throw InvalidArgument("BN encoders need run.embed_batch >= 2");
    }

    c.table.families = detail::list(cfg, "table", "families");
    c.table.norms = detail::list(cfg, "table", "norms");
    c.table.probes = detail::list(cfg, "table", "probes");
    for (const auto& depth : detail::list(cfg, "table", "depths")) c.table.depths.push_back(util::parse_number<int>(depth, "table.depths"));
    for (const auto& f : c.table.families) encoders::parse_family(f);
    for (const auto& n : c.table.norms) nn::parse_norm_kind(n);
    for (const auto& p : c.table.probes) probes::parse_probe_kind(p);
    for (int depth : c.table.depths) encoders::pointnet_widths(depth);
    return c;
}

/// Every effective setting, defaults included, as `key = value` text.
inline util::KeyValueConfig effective_config(const ExperimentConfig& c) {
    util::KeyValueConfig cfg;
    const DatasetConfig& d = c.dataset;
    cfg.set("dataset", "name", std::string(to_string(d.kind)));
    cfg.set("dataset", "mnist_dir", d.mnist_dir);
    cfg.set("dataset", "mesh_root", d.mesh_root);
    cfg.set("dataset", "n_points", std::to_string(d.effective_points()));
    cfg.set("dataset", "train_limit", std::to_string(d.train_limit));
    cfg.set("dataset", "test_limit", std::to_string(d.test_limit));
    cfg.set("dataset", "per_class_train", std::to_string(d.per_class_train));
    cfg.set("dataset", "per_class_test", std::to_string(d.per_class_test));
    cfg.set("dataset", "threshold", std::to_string(d.threshold));
    cfg.set("dataset", "seed", std::to_string(d.seed));
    cfg.set("dataset", "rotate", d.rotate ? "true" : "false");
    cfg.set("dataset", "cache_dir", d.cache_dir);
    encoders::write_spec(c.encoder, cfg);
    write_probe_spec(c.probe, cfg);
    cfg.set("probe", "linclf_epochs", std::to_string(c.epochs_for(probes::ProbeKind::LinClf)));
    cfg.set("probe", "nonlinclf_epochs", std::to_string(c.epochs_for(probes::ProbeKind::NonLinClf)));
    cfg.set("analysis", "k", std::to_string(c.analysis.k));
    cfg.set("analysis", "n_init", std::to_string(c.analysis.kmeans.n_init));
    cfg.set("analysis", "max_iterations", std::to_string(c.analysis.kmeans.max_iterations));
    cfg.set("analysis", "split", c.analysis.split);
    cfg.set("tsne", "perplexity", util::format_double(c.analysis.tsne.perplexity));
    cfg.set("tsne", "iterations", std::to_string(c.analysis.tsne.iterations));
    cfg.set("tsne", "learning_rate", util::format_double(c.analysis.tsne.learning_rate));
    cfg.set("tsne", "early_exaggeration", util::format_double(c.analysis.tsne.early_exaggeration));
    cfg.set("tsne", "points", std::to_string(c.analysis.tsne_points));
    decoder::write_spec(c.decoder, cfg);
    cfg.set("reconstruct", "label", std::to_string(c.reconstruct.label));
    cfg.set("reconstruct", "n_train", std::to_string(c.reconstruct.n_train));
    cfg.set("reconstruct", "n_heldout", std::to_string(c.reconstruct.n_heldout));
    cfg.set("reconstruct", "n_export", std::to_string(c.reconstruct.n_export));
    cfg.set("run", "n_runs", std::to_string(c.run.n_runs));
    cfg.set("run", "seed", std::to_string(c.run.seed));
    cfg.set("run", "out", c.run.out);
    cfg.set("run", "jobs", std::to_string(c.run.jobs));
    cfg.set("run", "embed_batch", std::to_string(c.run.embed_batch));
    cfg.set("run", "embedding_dir", c.run.embedding_dir);
    std::vector<std::string> depths;
    for (int depth : c.table.depths) depths.push_back(std::to_string(depth));
    cfg.set("table", "families", detail::join(c.table.families));
    cfg.set("table", "norms", detail::join(c.table.norms));
    cfg.set("table", "depths", detail::join(depths));
    cfg.set("table", "probes", detail::join(c.table.probes));
    return cfg;
}

}  // namespace rsf::cli
