#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rsf/analysis/chamfer.hpp"
#include "rsf/nn/init.hpp"
#include "rsf/nn/rng.hpp"
#include "rsf/probes/adam.hpp"
#include "rsf/probes/train.hpp"
#include "rsf/util/keyvalue.hpp"

namespace rsf::decoder {

using nn::Index;
using nn::Matrix;

/// Fully connected embedding -> point cloud map. Hidden layers use ReLU,
/// the output layer is linear and reshaped row-major into n_out x 3 points.
struct DecoderSpec {
    Index input_dim = 1024;
    Index n_out = 1024;
    std::vector<Index> hidden{1024, 1024, 1024};
    double learning_rate = 5e-4;
    std::size_t batch_size = 32;
    int epochs = 100;
    std::uint64_t seed = 0;

    std::vector<Index> widths() const {
        std::vector<Index> w = hidden;
        w.push_back(3 * n_out);
        return w;
    }
};

inline void validate(const DecoderSpec& spec) {
    if (spec.input_dim < 1 || spec.n_out < 1) throw InvalidArgument("decoder: input_dim and n_out must be positive");
    for (Index w : spec.hidden) {
        if (w < 1) throw InvalidArgument("decoder: hidden widths must be positive");
    }
    if (spec.batch_size < 1) throw InvalidArgument("decoder: batch_size must be >= 1");
    if (spec.epochs < 0) throw InvalidArgument("decoder: epochs must be >= 0");
    if (!(spec.learning_rate >= 0.0)) throw InvalidArgument("decoder: learning_rate must be >= 0");
}

inline void write_spec(const DecoderSpec& spec, util::KeyValueConfig& cfg, const std::string& section = "decoder") {
    std::string hidden;
    for (std::size_t i = 0; i < spec.hidden.size(); ++i) hidden += (i ? "," : "") + std::to_string(spec.hidden[i]);
    cfg.set(section, "input_dim", std::to_string(spec.input_dim));
    cfg.set(section, "n_out", std::to_string(spec.n_out));
    cfg.set(section, "hidden", hidden);
    cfg.set(section, "learning_rate", util::format_double(spec.learning_rate));
    cfg.set(section, "batch_size", std::to_string(spec.batch_size));
    cfg.set(section, "epochs", std::to_string(spec.epochs));
    cfg.set(section, "seed", std::to_string(spec.seed));
}

inline DecoderSpec read_spec(const util::KeyValueConfig& cfg, const std::string& section = "decoder") {
    DecoderSpec spec;
    spec.input_dim = cfg.get_number<Index>(section, "input_dim", spec.input_dim);
    spec.n_out = cfg.get_number<Index>(section, "n_out", spec.n_out);
    if (auto hidden = cfg.get(section, "hidden")) {
        spec.hidden.clear();
        for (const auto& tok : util::split(*hidden, ',')) {
            spec.hidden.push_back(util::parse_number<Index>(util::trim(tok), "decoder hidden width"));
        }
    }
    spec.learning_rate = cfg.get_number<double>(section, "learning_rate", spec.learning_rate);
    spec.batch_size = cfg.get_number<std::size_t>(section, "batch_size", spec.batch_size);
    spec.epochs = cfg.get_number<int>(section, "epochs", spec.epochs);
    spec.seed = cfg.get_number<std::uint64_t>(section, "seed", spec.seed);
    validate(spec);
    return spec;
}

struct DecoderModel {
    DecoderSpec spec;
    std::vector<probes::DenseParams> layers;
    probes::Adam optimizer;

    std::vector<Matrix*> parameters() {
        std::vector<Matrix*> out;
        for (auto& l : layers) {
            out.push_back(&l.weight);
            out.push_back(&l.bias);
        }
        return out;
    }
};

/// Glorot weights, zero biases, drawn from substream 0 of spec.seed.
inline DecoderModel make_decoder(const DecoderSpec& spec) {
    validate(spec);
    DecoderModel model;
    model.spec = spec;
    model.optimizer = probes::Adam(probes::AdamConfig{.learning_rate = spec.learning_rate});
    nn::Rng rng(nn::derive_seed(spec.seed, 0));
    Index in = spec.input_dim;
    for (Index out : spec.widths()) {
        model.layers.push_back({nn::glorot_init(in, out, rng), Matrix::Zero(1, out)});
        in = out;
    }
    return model;
}

namespace detail {

/// Layer inputs (activations[0] = E) and the final linear output.
struct Trace {
    std::vector<Matrix> activations;
    Matrix output;
};

inline Trace forward_trace(const DecoderModel& model, const Eigen::Ref<const Matrix>& e) {
    if (e.cols() != model.spec.input_dim) {
        throw InvalidArgument("decoder_forward: embedding width " + std::to_string(e.cols()) + ", expected " +
                              std::to_string(model.spec.input_dim));
    }
    Trace t;
    Matrix h = e;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        Matrix z = h * model.layers[l].weight;
        z.rowwise() += model.layers[l].bias.row(0);
        t.activations.push_back(std::move(h));
        if (l + 1 < model.layers.size()) z = z.cwiseMax(0.0);
        h = std::move(z);
    }
    t.output = std::move(h);
    return t;
}

inline Matrix row_to_cloud(const Eigen::Ref<const Matrix>& out, Index row, Index n_out) {
    Matrix cloud(n_out, 3);
    for (Index p = 0; p < n_out; ++p) {
        for (Index k = 0; k < 3; ++k) cloud(p, k) = out(row, 3 * p + k);
    }
    return cloud;
}

}  // namespace detail

/// Decode a batch of embeddings; cloud b is row b of the last layer
/// reshaped into n_out points.
inline std::vector<Matrix> decoder_forward(const DecoderModel& model, const Eigen::Ref<const Matrix>& e) {
    const detail::Trace t = detail::forward_trace(model, e);
    std::vector<Matrix> clouds;
    clouds.reserve(static_cast<std::size_t>(e.rows()));
    for (Index b = 0; b < e.rows(); ++b) clouds.push_back(detail::row_to_cloud(t.output, b, model.spec.n_out));
    return clouds;
}

struct DecoderGradients {
    double loss = 0.0;  ///< mean Chamfer over the batch
    std::vector<Matrix> grads;
};

/// Mean batch Chamfer and its gradient for every parameter (W, b per layer).
inline DecoderGradients decoder_backward(const DecoderModel& model, const Eigen::Ref<const Matrix>& e,
                                         std::span<const Matrix> targets) {
    if (static_cast<Index>(targets.size()) != e.rows()) throw InvalidArgument("decoder_backward: batch/target count mismatch");
    const detail::Trace t = detail::forward_trace(model, e);
    const Index batch = e.rows();
    const Index n_out = model.spec.n_out;
    DecoderGradients g;
    Matrix dz(batch, 3 * n_out);
    for (Index b = 0; b < batch; ++b) {
        const Matrix pred = detail::row_to_cloud(t.output, b, n_out);
        const analysis::ChamferGrad cg = analysis::chamfer_backward(pred, targets[static_cast<std::size_t>(b)]);
        g.loss += cg.loss;
        for (Index p = 0; p < n_out; ++p) {
            for (Index k = 0; k < 3; ++k) dz(b, 3 * p + k) = cg.grad(p, k);
        }
    }
    const double inv_b = 1.0 / static_cast<double>(batch);
    g.loss *= inv_b;
    dz *= inv_b;

    g.grads.resize(2 * model.layers.size());
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const Matrix& a = t.activations[l];
        g.grads[2 * l] = a.transpose() * dz;
        g.grads[2 * l + 1] = dz.colwise().sum();
        if (l == 0) break;
        Matrix da = dz * model.layers[l].weight.transpose();
        // a is the ReLU output of layer l - 1: the derivative is 1 where it is positive.
        dz = da.cwiseProduct((a.array() > 0.0).cast<double>().matrix());
    }
    return g;
}

/// Mean Chamfer of the decoded clouds against targets.
inline double evaluate_chamfer(const DecoderModel& model, const Eigen::Ref<const Matrix>& e, std::span<const Matrix> targets,
                               Index chunk = 256) {
    if (static_cast<Index>(targets.size()) != e.rows()) throw InvalidArgument("evaluate_chamfer: count mismatch");
    if (e.rows() == 0) throw EmptySetError("evaluate_chamfer: no samples");
    double sum = 0.0;
    for (Index start = 0; start < e.rows(); start += chunk) {
        const Index n = std::min(chunk, e.rows() - start);
        const auto clouds = decoder_forward(model, e.middleRows(start, n));
        for (Index b = 0; b < n; ++b) {
            sum += analysis::chamfer(clouds[static_cast<std::size_t>(b)], targets[static_cast<std::size_t>(start + b)]);
        }
    }
    return sum / static_cast<double>(e.rows());
}

struct DecoderReport {
    std::vector<double> step_chamfer;   ///< batch loss before each optimizer step
    std::vector<double> epoch_chamfer;  ///< mean batch loss per epoch
    std::vector<double> epoch_heldout;  ///< held-out Chamfer after each epoch (if held-out data given)
    double initial_train_chamfer = 0.0;
    double final_train_chamfer = 0.0;
    double final_heldout_chamfer = 0.0;
    long long steps = 0;
    double wall_seconds = 0.0;
};

/**
 * @brief Train a decoder with Adam on frozen embeddings under Chamfer loss.
 *
 * Samples are reshuffled every epoch from substream 1 of spec.seed; a
 * trailing batch of one joins the previous batch. Held-out data is
 * optional (pass empty arguments to skip it).
 */
inline std::pair<DecoderModel, DecoderReport> train_decoder(const DecoderSpec& spec, const Matrix& embeddings,
                                                            std::span<const Matrix> clouds, const Matrix& heldout_embeddings = {},
                                                            std::span<const Matrix> heldout_clouds = {}) {
    if (embeddings.rows() == 0) throw EmptySetError("train_decoder: no training samples");
    if (static_cast<Index>(clouds.size()) != embeddings.rows()) {
        throw InvalidArgument("train_decoder: " + std::to_string(embeddings.rows()) + " embeddings but " +
                              std::to_string(clouds.size()) + " clouds");
    }
    if (static_cast<Index>(heldout_clouds.size()) != heldout_embeddings.rows()) {
        throw InvalidArgument("train_decoder: held-out count mismatch");
    }
    for (const Matrix& c : clouds) {
        if (c.rows() != clouds.front().rows() || c.cols() != 3) throw InvalidArgument("train_decoder: clouds must share a fixed n x 3 shape");
    }
    const auto t0 = std::chrono::steady_clock::now();
    DecoderModel model = make_decoder(spec);
    nn::Rng shuffle_rng(nn::derive_seed(spec.seed, 1));
    const bool has_heldout = heldout_embeddings.rows() > 0;

    DecoderReport report;
    report.initial_train_chamfer = evaluate_chamfer(model, embeddings, clouds);
    const std::size_t n = clouds.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const auto ranges = probes::batch_ranges(n, spec.batch_size);
    Matrix batch_e;
    std::vector<Matrix> batch_c;
    for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
        nn::shuffle(order, shuffle_rng);
        double sum = 0.0;
        for (const auto& [begin, end] : ranges) {
            batch_e.resize(static_cast<Index>(end - begin), embeddings.cols());
            batch_c.clear();
            for (std::size_t k = begin; k < end; ++k) {
                batch_e.row(static_cast<Index>(k - begin)) = embeddings.row(static_cast<Index>(order[k]));
                batch_c.push_back(clouds[order[k]]);
            }
            DecoderGradients g = decoder_backward(model, batch_e, batch_c);
            if (!std::isfinite(g.loss)) throw NumericError("train_decoder: non-finite Chamfer at epoch " + std::to_string(epoch));
            model.optimizer.step(model.parameters(), g.grads);
            report.step_chamfer.push_back(g.loss);
            sum += g.loss * static_cast<double>(end - begin);
            ++report.steps;
        }
        report.epoch_chamfer.push_back(sum / static_cast<double>(n));
        if (has_heldout) report.epoch_heldout.push_back(evaluate_chamfer(model, heldout_embeddings, heldout_clouds));
    }
    for (Matrix* p : model.parameters()) nn::require_finite(*p, "train_decoder parameters");
    report.final_train_chamfer = evaluate_chamfer(model, embeddings, clouds);
    if (has_heldout) report.final_heldout_chamfer = evaluate_chamfer(model, heldout_embeddings, heldout_clouds);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

/// XYZ text: one "x y z" line per point, shortest round-trip formatting.
inline std::string to_xyz(const Eigen::Ref<const Matrix>& cloud) {
    std::ostringstream out;
    for (Index i = 0; i < cloud.rows(); ++i) {
        for (Index k = 0; k < cloud.cols(); ++k) out << (k ? " " : "") << util::format_double(cloud(i, k));
        out << '\n';
    }
    return out.str();
}

}  // namespace rsf::decoder
