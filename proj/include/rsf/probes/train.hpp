#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsf/encoders/embedding.hpp"
#include "rsf/probes/probe.hpp"

namespace rsf::probes {

struct TrainReport {
    std::vector<double> epoch_loss;      ///< mean train-mode loss per epoch
    std::vector<double> epoch_test_acc;  ///< eval-mode test accuracy after each epoch
    double initial_train_loss = 0.0;     ///< eval-mode loss at initialization
    double final_train_loss = 0.0;       ///< eval-mode loss after training
    double final_train_acc = 0.0;
    double final_test_acc = 0.0;
    double best_test_acc = 0.0;  ///< reported accuracy
    int best_epoch = 0;          ///< 1-based; 0 means the initial model
    int epochs = 0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

/**
 * Split [0, n) into consecutive batches of `batch_size`. A trailing batch
 * of one sample joins the previous batch (BN needs two rows).
 */
inline std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch_size) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = std::min(start + batch_size, n);
        if (n - end == 1 && end > start + 1) ++end;
        out.emplace_back(start, end);
        start = end;
    }
    return out;
}

/**
 * @brief Train a probe with Adam on frozen embeddings.
 *
 * Deterministic in (spec, data): initialization, per-epoch shuffling and
 * dropout masks use separate substreams of spec.seed. Test accuracy is
 * measured after every epoch and the best value is reported.
 */
inline std::pair<ProbeModel, TrainReport> train_probe(const ProbeSpec& spec_in, const encoders::EmbeddingMatrix& train,
                                                      const encoders::EmbeddingMatrix& test) {
    if (train.size() == 0 || test.size() == 0) throw EmptySetError("train_probe: empty split");
    if (train.data.cols() != test.data.cols()) throw InvalidArgument("train_probe: train/test embedding widths differ");
    ProbeSpec spec = spec_in;
    spec.input_dim = train.data.cols();
    int max_label = 0;
    for (int y : train.labels) max_label = std::max(max_label, y);
    for (int y : test.labels) max_label = std::max(max_label, y);
    if (max_label >= spec.n_classes) {
        throw InvalidArgument("train_probe: label " + std::to_string(max_label) + " >= n_classes " + std::to_string(spec.n_classes));
    }
    const auto t0 = std::chrono::steady_clock::now();
    ProbeModel model = make_probe(spec);
    nn::Rng shuffle_rng(nn::derive_seed(spec.seed, 1));
    nn::Rng dropout_rng(nn::derive_seed(spec.seed, 2));

    TrainReport report;
    report.seed = spec.seed;
    report.epochs = spec.epochs;
    report.initial_train_loss = evaluate_loss(model, train.data, train.labels);
    report.best_test_acc = accuracy(model, test.data, test.labels);
    report.final_test_acc = report.best_test_acc;

    const std::size_t n = static_cast<std::size_t>(train.size());
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const auto ranges = batch_ranges(n, spec.batch_size);
    Matrix batch_x;
    std::vector<int> batch_y;
    for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
        nn::shuffle(order, shuffle_rng);
        double loss_sum = 0.0;
        for (const auto& [begin, end] : ranges) {
            const Index rows = static_cast<Index>(end - begin);
            batch_x.resize(rows, train.data.cols());
            batch_y.resize(end - begin);
            for (std::size_t k = begin; k < end; ++k) {
                batch_x.row(static_cast<Index>(k - begin)) = train.data.row(static_cast<Index>(order[k]));
                batch_y[k - begin] = train.labels[order[k]];
            }
            const ForwardCache cache = probe_forward(model, batch_x, Mode::Train, &dropout_rng);
            const ProbeGradients g = probe_backward(model, cache, batch_y);
            if (!std::isfinite(g.loss)) throw NumericError("train_probe: non-finite loss at epoch " + std::to_string(epoch));
            adam_step(model, g);
            loss_sum += g.loss * static_cast<double>(rows);
        }
        report.epoch_loss.push_back(loss_sum / static_cast<double>(n));
        const double acc = accuracy(model, test.data, test.labels);
        report.epoch_test_acc.push_back(acc);
        report.final_test_acc = acc;
        if (acc > report.best_test_acc) {
            report.best_test_acc = acc;
            report.best_epoch = epoch;
        }
    }
    for (Matrix* p : model.parameters()) nn::require_finite(*p, "train_probe parameters");
    report.final_train_loss = evaluate_loss(model, train.data, train.labels);
    report.final_train_acc = accuracy(model, train.data, train.labels);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

struct RunStats {
    std::size_t count = 0;
    double mean = 0.0;
    std::optional<double> stddev;  ///< sample std (n - 1); undefined for one run
};

/// Mean and sample standard deviation; values are sorted first so the
/// result does not depend on run completion order.
inline RunStats aggregate_runs(std::vector<double> values) {
    if (values.empty()) throw EmptySetError("aggregate_runs: no values");
    std::sort(values.begin(), values.end());
    RunStats s;
    s.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

}  // namespace rsf::probes
