#pragma once

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include "rsf/analysis.hpp"
#include "rsf/cli/pipeline.hpp"
#include "rsf/cli/report.hpp"
#include "rsf/decoder/decoder.hpp"
#include "rsf/probes/train.hpp"

namespace rsf::cli {

using nn::Index;
using nn::Matrix;

/// Parsed configuration plus its fully materialized echo.
struct Context {
    ExperimentConfig config;
    util::KeyValueConfig effective;

    fs::path out() const { return fs::path(config.run.out); }
};

inline Context make_context(const util::KeyValueConfig& raw) {
    Context ctx;
    ctx.config = read_config(raw);
    ctx.config.encoder.seed = run_seeds(ctx.config.run.seed, 0).encoder;
    ctx.effective = effective_config(ctx.config);
    for (const auto& [section, keys] : raw.sections()) {
        for (const auto& entry : keys) {
            if (!ctx.effective.has(section, entry.first)) {
                throw InvalidArgument("unknown config key " + section + "." + entry.first);
            }
        }
    }
    return ctx;
}

inline std::string dataset_display(const ExperimentConfig& c, bool rotated) {
    return std::string(to_string(c.dataset.kind)) + (rotated ? "-rotated" : "");
}

inline int encoder_depth(const encoders::EncoderSpec& spec) { return static_cast<int>(spec.widths.size()); }

inline void write_text(const fs::path& path, const std::string& text) {
    util::write_file_atomic(path, text);
    log("wrote " + path.string());
}

// ------------------------------------------------------------------ prepare / embed

inline int cmd_prepare(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    Json summary = Json::array();
    for (const std::string split : {"train", "test"}) {
        log("building " + std::string(to_string(c.dataset.kind)) + " " + split + " split");
        const data::Dataset ds = build_split(c.dataset, split);
        const fs::path path = cache_path(c, split);
        data::write_cache(ds.manifest, ds.clouds, path);
        log("wrote " + path.string() + " (" + std::to_string(ds.manifest.item_count) + " clouds)");
        summary.push_back({{"split", split}, {"path", path.string()}, {"items", ds.manifest.item_count}});
    }
    Report report("prepare", ctx.effective);
    report["caches"] = summary;
    report.write(ctx.out() / "prepare.json");
    return 0;
}

inline int cmd_embed(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    SplitStore splits(c);
    const RunSeeds seeds = run_seeds(c.run.seed, 0);
    Json files = Json::array();
    for (const std::string split : {"train", "test"}) {
        const auto emb = embed_split(c, splits, split, c.dataset.rotate, c.encoder, seeds.order);
        const fs::path path = ctx.out() / (dataset_display(c, c.dataset.rotate) + "-" + split + "-" +
                                           encoders::spec_label(c.encoder) + ".rsfe");
        encoders::write_embeddings(emb, path);
        log("wrote " + path.string() + " (" + std::to_string(emb.data.rows()) + " x " + std::to_string(emb.data.cols()) + ")");
        files.push_back({{"split", split}, {"path", path.string()}, {"rows", emb.data.rows()}, {"cols", emb.data.cols()}});
    }
    Report report("embed", ctx.effective);
    report["embeddings"] = files;
    report.write(ctx.out() / "embed.json");
    return 0;
}

// ------------------------------------------------------------------ probe grids

/// One encoder configuration probed with one or more classifiers.
struct ProbeCell {
    bool rotated = false;
    encoders::EncoderSpec encoder;
    std::vector<probes::ProbeKind> probes;
};

struct ProbeRow {
    std::size_t cell = 0;
    std::size_t probe_slot = 0;
    int run = 0;
    std::string dataset;
    encoders::EncoderSpec encoder;
    probes::ProbeKind probe = probes::ProbeKind::LinClf;
    std::uint64_t seed = 0;
    probes::TrainReport report;
};

inline std::vector<ProbeRow> run_probe_grid(const Context& ctx, const std::vector<ProbeCell>& cells) {
    const ExperimentConfig& c = ctx.config;
    SplitStore splits(c);
    const std::size_t runs = static_cast<std::size_t>(c.run.n_runs);
    std::vector<std::vector<ProbeRow>> results(cells.size() * runs);
    parallel_for(results.size(), c.run.jobs, [&](std::size_t task) {
        const std::size_t cell_index = task / runs;
        const int r = static_cast<int>(task % runs);
        const ProbeCell& cell = cells[cell_index];
        const RunSeeds seeds = run_seeds(c.run.seed, r);
        encoders::EncoderSpec spec = cell.encoder;
        spec.seed = seeds.encoder;
        const auto train = embed_split(c, splits, "train", cell.rotated, spec, seeds.order);
        const auto test = embed_split(c, splits, "test", cell.rotated, spec, seeds.order);
        for (std::size_t p = 0; p < cell.probes.size(); ++p) {
            probes::ProbeSpec ps = c.probe;
            ps.kind = cell.probes[p];
            ps.epochs = c.epochs_for(ps.kind);
            ps.seed = seeds.probe;
            ps.n_classes = std::max(train.n_classes(), 2);
            ProbeRow row;
            row.cell = cell_index;
            row.probe_slot = p;
            row.run = r;
            row.dataset = dataset_display(c, cell.rotated);
            row.encoder = spec;
            row.probe = ps.kind;
            row.seed = seeds.run;
            row.report = probes::train_probe(ps, train, test).second;
            log(row.dataset + " " + encoders::spec_label(spec) + " " + std::string(probes::to_string(ps.kind)) + " run " +
                std::to_string(r) + ": best test acc " + fixed(row.report.best_test_acc, 2) + "% (epoch " +
                std::to_string(row.report.best_epoch) + "/" + std::to_string(ps.epochs) + ", " +
                fixed(row.report.wall_seconds, 1) + " s)");
            results[task].push_back(std::move(row));
        }
    });
    std::vector<ProbeRow> rows;
    for (auto& chunk : results) {
        for (auto& row : chunk) rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ProbeRow& a, const ProbeRow& b) {
        if (a.cell != b.cell) return a.cell < b.cell;
        if (a.probe_slot != b.probe_slot) return a.probe_slot < b.probe_slot;
        return a.run < b.run;
    });
    return rows;
}

/**
 * @brief Write <name>.csv (per-run rows, then a mean ± std row per cell),
 * <name>_summary.csv (one numeric row per cell) and <name>.json.
 *
 * The CSVs hold only seed-determined values so reruns are byte-identical;
 * wall times go to the JSON report.
 */
inline void write_probe_reports(const Context& ctx, const std::string& name, const std::vector<ProbeRow>& rows) {
    const std::vector<std::string> columns{"dataset", "encoder", "norm", "depth", "probe", "seed", "test_acc", "epochs"};
    CsvTable runs(columns);
    CsvTable summary({"dataset", "encoder", "norm", "depth", "probe", "runs", "mean_test_acc", "std_test_acc", "epochs"});
    Report report(name, ctx.effective);
    Json run_json = Json::array();
    Json summary_json = Json::array();
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        std::vector<double> accs;
        while (j < rows.size() && rows[j].cell == rows[i].cell && rows[j].probe_slot == rows[i].probe_slot) {
            const ProbeRow& row = rows[j];
            const std::vector<std::string> key{row.dataset, std::string(encoders::to_string(row.encoder.family)),
                                               std::string(nn::to_string(row.encoder.norm.kind)),
                                               std::to_string(encoder_depth(row.encoder)), std::string(probes::to_string(row.probe))};
            std::vector<std::string> cells = key;
            cells.push_back(std::to_string(row.seed));
            cells.push_back(fixed(row.report.best_test_acc, 3));
            cells.push_back(std::to_string(row.report.epochs));
            runs.add(cells);
            accs.push_back(row.report.best_test_acc);
            run_json.push_back({{"dataset", row.dataset},
                                {"encoder", encoders::to_string(row.encoder.family)},
                                {"norm", nn::to_string(row.encoder.norm.kind)},
                                {"depth", encoder_depth(row.encoder)},
                                {"probe", probes::to_string(row.probe)},
                                {"run", row.run},
                                {"seed", row.seed},
                                {"encoder_seed", row.encoder.seed},
                                {"test_acc", row.report.best_test_acc},
                                {"best_epoch", row.report.best_epoch},
                                {"final_test_acc", row.report.final_test_acc},
                                {"final_train_acc", row.report.final_train_acc},
                                {"initial_train_loss", row.report.initial_train_loss},
                                {"final_train_loss", row.report.final_train_loss},
                                {"epochs", row.report.epochs},
                                {"wall_s", row.report.wall_seconds}});
            ++j;
        }
        const probes::RunStats stats = probes::aggregate_runs(accs);
        const ProbeRow& head = rows[i];
        std::vector<std::string> key{head.dataset, std::string(encoders::to_string(head.encoder.family)),
                                     std::string(nn::to_string(head.encoder.norm.kind)),
                                     std::to_string(encoder_depth(head.encoder)), std::string(probes::to_string(head.probe))};
        const std::string std_text = stats.stddev ? fixed(*stats.stddev, 3) : "undefined";
        std::vector<std::string> mean_row = key;
        mean_row.push_back("mean±std");
        mean_row.push_back(fixed(stats.mean, 3) + " ± " + std_text);
        mean_row.push_back(std::to_string(head.report.epochs));
        runs.add(mean_row);
        std::vector<std::string> summary_row = key;
        summary_row.push_back(std::to_string(stats.count));
        summary_row.push_back(fixed(stats.mean, 3));
        summary_row.push_back(std_text);
        summary_row.push_back(std::to_string(head.report.epochs));
        summary.add(summary_row);
        summary_json.push_back({{"dataset", head.dataset},
                                {"encoder", encoders::spec_label(head.encoder)},
                                {"probe", probes::to_string(head.probe)},
                                {"runs", stats.count},
                                {"mean_test_acc", stats.mean},
                                {"std_test_acc", stats.stddev ? Json(*stats.stddev) : Json(nullptr)}});
        i = j;
    }
    write_text(ctx.out() / (name + ".csv"), runs.text());
    write_text(ctx.out() / (name + "_summary.csv"), summary.text());
    report["runs"] = run_json;
    report["summary"] = summary_json;
    report.write(ctx.out() / (name + ".json"));
}

inline std::vector<probes::ProbeKind> table_probes(const ExperimentConfig& c) {
    std::vector<probes::ProbeKind> out;
    for (const auto& name : c.table.probes) out.push_back(probes::parse_probe_kind(name));
    if (out.empty()) out = {probes::ProbeKind::LinClf, probes::ProbeKind::NonLinClf};
    return out;
}

inline int cmd_probe(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    ProbeCell cell{c.dataset.rotate, c.encoder, {c.probe.kind}};
    write_probe_reports(ctx, "probe", run_probe_grid(ctx, {cell}));
    return 0;
}

/// Encoder families x probes.
inline int cmd_table1(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    std::vector<std::string> families = c.table.families;
    if (families.empty()) families = {"LinSetNN", "LinSet", "PointNet", "DeepSets"};
    std::vector<ProbeCell> cells;
    for (const auto& name : families) {
        const auto family = encoders::parse_family(name);
        encoders::EncoderSpec spec = family == encoders::Family::PointNet ? c.encoder
                                                                          : encoders::default_spec(family, c.encoder.input_dim, 0);
        spec.family = family;
        cells.push_back({c.dataset.rotate, spec, table_probes(c)});
    }
    write_probe_reports(ctx, "table1", run_probe_grid(ctx, cells));
    return 0;
}

/// PointNet normalization ablation.
inline int cmd_table2(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    std::vector<std::string> norms = c.table.norms;
    if (norms.empty()) norms = {"BN", "IN", "LN", "NN"};
    std::vector<ProbeCell> cells;
    for (const auto& norm : norms) {
        const auto spec = encoders::default_spec(encoders::Family::PointNet, c.encoder.input_dim, 0, nn::parse_norm_kind(norm),
                                                 c.encoder.n_mlp_blocks);
        cells.push_back({c.dataset.rotate, spec, table_probes(c)});
    }
    write_probe_reports(ctx, "table2", run_probe_grid(ctx, cells));
    return 0;
}

/// PointNet depth ablation under IN and NN.
inline int cmd_table3(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    std::vector<std::string> norms = c.table.norms;
    if (norms.empty()) norms = {"IN", "NN"};
    std::vector<int> depths = c.table.depths;
    if (depths.empty()) depths = {1, 2, 3, 5};
    std::vector<ProbeCell> cells;
    for (const auto& norm : norms) {
        for (int depth : depths) {
            const auto spec = encoders::default_spec(encoders::Family::PointNet, c.encoder.input_dim, 0,
                                                     nn::parse_norm_kind(norm), depth);
            cells.push_back({c.dataset.rotate, spec, table_probes(c)});
        }
    }
    write_probe_reports(ctx, "table3", run_probe_grid(ctx, cells));
    return 0;
}

/// Aligned versus randomly rotated copies of a 3-D dataset.
inline int cmd_table4(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    if (c.encoder.input_dim != 3) throw InvalidArgument("table4 needs a 3-D dataset (synthetic or mesh)");
    std::vector<ProbeCell> cells{{false, c.encoder, table_probes(c)}, {true, c.encoder, table_probes(c)}};
    write_probe_reports(ctx, "table4", run_probe_grid(ctx, cells));
    return 0;
}

// ------------------------------------------------------------------ clustering

struct ClusterRow {
    std::size_t cell = 0;
    int run = 0;
    std::string dataset;
    encoders::EncoderSpec encoder;
    std::uint64_t seed = 0;
    int k = 0;
    double ami = 0.0;
    double inertia = 0.0;
    int iterations = 0;
    double wall_seconds = 0.0;
};

inline std::vector<ClusterRow> run_cluster_grid(const Context& ctx, const std::vector<encoders::EncoderSpec>& cells) {
    const ExperimentConfig& c = ctx.config;
    SplitStore splits(c);
    const std::size_t runs = static_cast<std::size_t>(c.run.n_runs);
    std::vector<ClusterRow> rows(cells.size() * runs);
    parallel_for(rows.size(), c.run.jobs, [&](std::size_t task) {
        const auto t0 = std::chrono::steady_clock::now();
        const int r = static_cast<int>(task % runs);
        const RunSeeds seeds = run_seeds(c.run.seed, r);
        encoders::EncoderSpec spec = cells[task / runs];
        spec.seed = seeds.encoder;
        const auto emb = embed_split(c, splits, c.analysis.split, c.dataset.rotate, spec, seeds.order);
        const int k = c.analysis.k > 0 ? c.analysis.k : emb.n_classes();
        nn::Rng rng(seeds.kmeans);
        const auto assignment = analysis::kmeans_pp(emb.data, k, rng, c.analysis.kmeans);
        ClusterRow& row = rows[task];
        row.cell = task / runs;
        row.run = r;
        row.dataset = dataset_display(c, c.dataset.rotate);
        row.encoder = spec;
        row.seed = seeds.run;
        row.k = k;
        row.ami = analysis::adjusted_mutual_information(assignment.labels, emb.labels);
        row.inertia = assignment.inertia;
        row.iterations = assignment.iterations;
        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log(row.dataset + " " + encoders::spec_label(spec) + " k-means run " + std::to_string(r) + ": AMI " + fixed(row.ami, 4));
    });
    return rows;
}

inline void write_cluster_reports(const Context& ctx, const std::string& name, const std::vector<ClusterRow>& rows) {
    CsvTable runs({"dataset", "encoder", "norm", "depth", "seed", "k", "ami", "inertia"});
    CsvTable summary({"dataset", "encoder", "norm", "depth", "k", "runs", "mean_ami", "std_ami"});
    Report report(name, ctx.effective);
    Json run_json = Json::array();
    Json summary_json = Json::array();
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        std::vector<double> amis;
        const ClusterRow& head = rows[i];
        const std::vector<std::string> key{head.dataset, std::string(encoders::to_string(head.encoder.family)),
                                           std::string(nn::to_string(head.encoder.norm.kind)),
                                           std::to_string(encoder_depth(head.encoder))};
        while (j < rows.size() && rows[j].cell == head.cell) {
            const ClusterRow& row = rows[j];
            std::vector<std::string> cells = key;
            cells.push_back(std::to_string(row.seed));
            cells.push_back(std::to_string(row.k));
            cells.push_back(fixed(row.ami, 6));
            cells.push_back(fixed(row.inertia, 6));
            runs.add(cells);
            amis.push_back(row.ami);
            run_json.push_back({{"dataset", row.dataset},
                                {"encoder", encoders::spec_label(row.encoder)},
                                {"run", row.run},
                                {"seed", row.seed},
                                {"encoder_seed", row.encoder.seed},
                                {"k", row.k},
                                {"ami", row.ami},
                                {"inertia", row.inertia},
                                {"iterations", row.iterations},
                                {"wall_s", row.wall_seconds}});
            ++j;
        }
        const probes::RunStats stats = probes::aggregate_runs(amis);
        const std::string std_text = stats.stddev ? fixed(*stats.stddev, 6) : "undefined";
        std::vector<std::string> mean_row = key;
        mean_row.push_back("mean±std");
        mean_row.push_back(std::to_string(head.k));
        mean_row.push_back(fixed(stats.mean, 6) + " ± " + std_text);
        mean_row.push_back("");
        runs.add(mean_row);
        std::vector<std::string> summary_row = key;
        summary_row.push_back(std::to_string(head.k));
        summary_row.push_back(std::to_string(stats.count));
        summary_row.push_back(fixed(stats.mean, 6));
        summary_row.push_back(std_text);
        summary.add(summary_row);
        summary_json.push_back({{"dataset", head.dataset},
                                {"encoder", encoders::spec_label(head.encoder)},
                                {"k", head.k},
                                {"runs", stats.count},
                                {"mean_ami", stats.mean},
                                {"std_ami", stats.stddev ? Json(*stats.stddev) : Json(nullptr)}});
        i = j;
    }
    write_text(ctx.out() / (name + ".csv"), runs.text());
    write_text(ctx.out() / (name + "_summary.csv"), summary.text());
    report["runs"] = run_json;
    report["summary"] = summary_json;
    report.write(ctx.out() / (name + ".json"));
}

inline int cmd_cluster(const Context& ctx) {
    write_cluster_reports(ctx, "cluster", run_cluster_grid(ctx, {ctx.config.encoder}));
    return 0;
}

/// K-Means++ AMI for every encoder family.
inline int cmd_table5(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    std::vector<std::string> families = c.table.families;
    if (families.empty()) families = {"LinSetNN", "LinSet", "PointNet", "DeepSets"};
    std::vector<encoders::EncoderSpec> cells;
    for (const auto& name : families) {
        const auto family = encoders::parse_family(name);
        cells.push_back(family == encoders::Family::PointNet ? c.encoder : encoders::default_spec(family, c.encoder.input_dim, 0));
    }
    write_cluster_reports(ctx, "table5", run_cluster_grid(ctx, cells));
    return 0;
}

// ------------------------------------------------------------------ t-SNE

inline int cmd_tsne(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    SplitStore splits(c);
    const RunSeeds seeds = run_seeds(c.run.seed, 0);
    const auto emb = embed_split(c, splits, c.analysis.split, c.dataset.rotate, c.encoder, seeds.order);
    const Index n = c.analysis.tsne_points == 0 ? emb.data.rows()
                                                : std::min<Index>(emb.data.rows(), static_cast<Index>(c.analysis.tsne_points));
    const Matrix x = emb.data.topRows(n);
    const std::vector<int> labels(emb.labels.begin(), emb.labels.begin() + n);
    const std::vector<std::string> ids(emb.ids.begin(), emb.ids.begin() + n);
    analysis::TsneParams params = c.analysis.tsne;
    params.seed = seeds.tsne;
    log("t-SNE on " + std::to_string(n) + " embeddings (perplexity " + util::format_double(params.perplexity) + ", " +
        std::to_string(params.iterations) + " iterations)");
    const auto result = analysis::tsne(x, params);
    const int k = c.analysis.k > 0 ? c.analysis.k : emb.n_classes();
    nn::Rng rng(seeds.kmeans);
    const auto clusters = analysis::kmeans_pp(x, k, rng, c.analysis.kmeans);
    write_text(ctx.out() / "tsne.csv", analysis::scatter_csv(ids, result.coords, labels, clusters.labels));
    Report report("tsne", ctx.effective);
    report["params"] = {{"perplexity", params.perplexity},
                        {"iterations", params.iterations},
                        {"learning_rate", params.learning_rate},
                        {"early_exaggeration", params.early_exaggeration},
                        {"exaggeration_iterations", params.exaggeration_iterations},
                        {"seed", params.seed}};
    report["points"] = n;
    report["initial_kl"] = result.initial_kl;
    report["final_kl"] = result.final_kl;
    report["max_entropy_error"] = result.max_entropy_error;
    Json trace = Json::array();
    for (const auto& [it, kl] : result.kl_trace) trace.push_back(Json{{"iteration", it}, {"kl", kl}});
    report["kl_trace"] = trace;
    report["kmeans_ami"] = analysis::adjusted_mutual_information(clusters.labels, labels);
    report.write(ctx.out() / "tsne.json");
    log("t-SNE KL " + fixed(result.initial_kl, 4) + " -> " + fixed(result.final_kl, 4));
    return 0;
}

// ------------------------------------------------------------------ reconstruction

inline int cmd_reconstruct(const Context& ctx) {
    const ExperimentConfig& c = ctx.config;
    if (c.encoder.input_dim != 3) throw InvalidArgument("reconstruct needs a 3-D dataset (synthetic or mesh)");
    SplitStore splits(c);
    const RunSeeds seeds = run_seeds(c.run.seed, 0);
    const int label = c.reconstruct.label;

    auto select = [&](const std::string& split, std::size_t limit) {
        const data::Dataset& ds = splits.get(split, c.dataset.rotate);
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < ds.clouds.size() && rows.size() < limit; ++i) {
            if (ds.clouds[i].label == label) rows.push_back(i);
        }
        if (rows.size() < limit) {
            throw InvalidArgument("reconstruct: " + split + " split has " + std::to_string(rows.size()) + " shapes of class " +
                                  std::to_string(label) + ", need " + std::to_string(limit));
        }
        return rows;
    };
    auto gather = [](const encoders::EmbeddingMatrix& emb, const std::vector<std::size_t>& rows) {
        Matrix out(static_cast<Index>(rows.size()), emb.data.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = emb.data.row(static_cast<Index>(rows[i]));
        return out;
    };
    auto clouds = [&](const std::string& split, const std::vector<std::size_t>& rows) {
        const data::Dataset& ds = splits.get(split, c.dataset.rotate);
        std::vector<Matrix> out;
        for (std::size_t i : rows) out.push_back(ds.clouds[i].points);
        return out;
    };

    const auto train_rows = select("train", c.reconstruct.n_train);
    const auto held_rows = select("test", c.reconstruct.n_heldout);
    encoders::EncoderSpec spec = c.encoder;
    spec.seed = seeds.encoder;
    encoders::EncoderSpec other = c.encoder;
    other.seed = seeds.mismatched_encoder;
    const Matrix train_e = gather(embed_split(c, splits, "train", c.dataset.rotate, spec, seeds.order), train_rows);
    const Matrix held_e = gather(embed_split(c, splits, "test", c.dataset.rotate, spec, seeds.order), held_rows);
    const Matrix held_other = gather(embed_split(c, splits, "test", c.dataset.rotate, other, seeds.order), held_rows);
    const auto train_gt = clouds("train", train_rows);
    const auto held_gt = clouds("test", held_rows);

    decoder::DecoderSpec dspec = c.decoder;
    dspec.seed = seeds.decoder;
    log("training decoder on " + std::to_string(train_rows.size()) + " shapes for " + std::to_string(dspec.epochs) + " epochs");
    const auto [model, rep] = decoder::train_decoder(dspec, train_e, train_gt, held_e, held_gt);
    const double mismatched = decoder::evaluate_chamfer(model, held_other, held_gt);

    CsvTable curve({"epoch", "train_chamfer", "heldout_chamfer"});
    for (std::size_t e = 0; e < rep.epoch_chamfer.size(); ++e) {
        curve.add({std::to_string(e + 1), fixed(rep.epoch_chamfer[e], 8),
                   e < rep.epoch_heldout.size() ? fixed(rep.epoch_heldout[e], 8) : ""});
    }
    write_text(ctx.out() / "reconstruct.csv", curve.text());

    const fs::path xyz_dir = ctx.out() / "reconstructions";
    const auto predictions = decoder::decoder_forward(model, held_e);
    const data::Dataset& test = splits.get("test", c.dataset.rotate);
    const std::size_t n_export = std::min(c.reconstruct.n_export, held_rows.size());
    Json exported = Json::array();
    for (std::size_t i = 0; i < n_export; ++i) {
        const std::string stem = sanitize(test.clouds[held_rows[i]].id);
        util::write_file_atomic(xyz_dir / (stem + ".pred.xyz"), decoder::to_xyz(predictions[i]));
        util::write_file_atomic(xyz_dir / (stem + ".gt.xyz"), decoder::to_xyz(held_gt[i]));
        exported.push_back(Json{{"id", test.clouds[held_rows[i]].id},
                            {"prediction", (xyz_dir / (stem + ".pred.xyz")).string()},
                            {"chamfer", analysis::chamfer(predictions[i], held_gt[i])}});
    }

    Report report("reconstruct", ctx.effective);
    report["class"] = test.manifest.class_names.at(static_cast<std::size_t>(label));
    report["n_train"] = train_rows.size();
    report["n_heldout"] = held_rows.size();
    report["steps"] = rep.steps;
    report["initial_train_chamfer"] = rep.initial_train_chamfer;
    report["final_train_chamfer"] = rep.final_train_chamfer;
    report["heldout_chamfer"] = rep.final_heldout_chamfer;
    report["mismatched_seed_heldout_chamfer"] = mismatched;
    report["encoder_seed"] = spec.seed;
    report["mismatched_encoder_seed"] = other.seed;
    report["wall_s"] = rep.wall_seconds;
    report["reconstructions"] = exported;
    report.write(ctx.out() / "reconstruct.json");
    log("decoder Chamfer: train " + fixed(rep.initial_train_chamfer, 5) + " -> " + fixed(rep.final_train_chamfer, 5) +
        ", held-out " + fixed(rep.final_heldout_chamfer, 5) + ", mismatched-seed held-out " + fixed(mismatched, 5));
    return 0;
}

inline int cmd_table(const Context& ctx, const std::string& name) {
    if (name == "table1") return cmd_table1(ctx);
    if (name == "table2") return cmd_table2(ctx);
    if (name == "table3") return cmd_table3(ctx);
    if (name == "table4") return cmd_table4(ctx);
    if (name == "table5") return cmd_table5(ctx);
    throw InvalidArgument("unknown table '" + name + "' (expected table1 .. table5)");
}

}  // namespace rsf::cli
