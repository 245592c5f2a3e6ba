#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/nn/init.hpp"
#include "rsf/nn/layers.hpp"
#include "rsf/nn/loss.hpp"
#include "rsf/nn/rng.hpp"
#include "rsf/probes/adam.hpp"

namespace rsf::probes {

using nn::RowVector;

enum class ProbeKind { LinClf, NonLinClf };

inline std::string_view to_string(ProbeKind kind) { return kind == ProbeKind::LinClf ? "LinClf" : "NonLinClf"; }

inline ProbeKind parse_probe_kind(std::string_view name) {
    if (name == "LinClf" || name == "linclf" || name == "linear") return ProbeKind::LinClf;
    if (name == "NonLinClf" || name == "nonlinclf" || name == "mlp") return ProbeKind::NonLinClf;
    throw InvalidArgument("unknown probe kind '" + std::string(name) + "'");
}

/// Classifier architecture and training hyperparameters.
struct ProbeSpec {
    ProbeKind kind = ProbeKind::LinClf;
    int n_classes = 10;
    Index input_dim = 1024;
    std::vector<Index> hidden{512, 256};  ///< NonLinClf only
    double dropout_p = 0.8;               ///< drop probability, inverted scaling
    double leaky_slope = 0.01;
    double bn_momentum = 0.1;
    double bn_epsilon = 1e-5;
    int epochs = 300;
    std::size_t batch_size = 32;
    AdamConfig adam{};
    std::uint64_t seed = 0;
};

inline void validate(const ProbeSpec& spec) {
    if (spec.n_classes < 2) throw InvalidArgument("probe needs at least 2 classes");
    if (spec.input_dim < 1) throw InvalidArgument("probe input_dim must be positive");
    if (!(spec.dropout_p >= 0.0 && spec.dropout_p < 1.0)) throw InvalidArgument("dropout_p must be in [0, 1)");
    if (!(spec.leaky_slope >= 0.0 && spec.leaky_slope < 1.0)) throw InvalidArgument("leaky_slope must be in [0, 1)");
    if (spec.kind == ProbeKind::NonLinClf && spec.hidden.empty()) throw InvalidArgument("NonLinClf needs hidden widths");
    if (spec.epochs < 0) throw InvalidArgument("epochs must be >= 0");
    if (spec.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
    if (!(spec.adam.learning_rate >= 0.0)) throw InvalidArgument("learning_rate must be >= 0");
}

/// Trainable batch normalization with running statistics.
struct BatchNormParams {
    Matrix gamma;  ///< 1 x d
    Matrix beta;   ///< 1 x d
    RowVector running_mean;
    RowVector running_var;
};

struct DenseParams {
    Matrix weight;  ///< in x out
    Matrix bias;    ///< 1 x out
};

/**
 * @brief LinClf is one Dense layer. NonLinClf is
 * Dense -> BN -> LeakyReLU -> Dropout per hidden width, then Dense to K.
 */
struct ProbeModel {
    ProbeSpec spec;
    std::vector<DenseParams> dense;
    std::vector<BatchNormParams> norms;
    Adam optimizer;

    /// Trainable parameters in a fixed order: for each hidden block W, b,
    /// gamma, beta; then the output W, b.
    std::vector<Matrix*> parameters() {
        std::vector<Matrix*> out;
        for (std::size_t l = 0; l < dense.size(); ++l) {
            out.push_back(&dense[l].weight);
            out.push_back(&dense[l].bias);
            if (l < norms.size()) {
                out.push_back(&norms[l].gamma);
                out.push_back(&norms[l].beta);
            }
        }
        return out;
    }
};

inline ProbeModel make_probe(const ProbeSpec& spec) {
    validate(spec);
    ProbeModel model;
    model.spec = spec;
    model.optimizer = Adam(spec.adam);
    nn::Rng rng(nn::derive_seed(spec.seed, 0));
    std::vector<Index> widths;
    if (spec.kind == ProbeKind::NonLinClf) widths = spec.hidden;
    widths.push_back(spec.n_classes);
    Index in = spec.input_dim;
    for (std::size_t l = 0; l < widths.size(); ++l) {
        DenseParams d;
        d.weight = nn::glorot_init(in, widths[l], rng);
        d.bias = Matrix::Zero(1, widths[l]);
        model.dense.push_back(std::move(d));
        if (l + 1 < widths.size()) {
            BatchNormParams bn;
            bn.gamma = Matrix::Ones(1, widths[l]);
            bn.beta = Matrix::Zero(1, widths[l]);
            bn.running_mean = RowVector::Zero(widths[l]);
            bn.running_var = RowVector::Ones(widths[l]);
            model.norms.push_back(std::move(bn));
        }
        in = widths[l];
    }
    return model;
}

/// Activations kept from a training-mode forward pass for backprop.
struct ForwardCache {
    Matrix input;
    struct Block {
        Matrix xhat;      ///< BN-normalized pre-activation
        RowVector inv_std;
        Matrix bn_out;    ///< gamma * xhat + beta
        Matrix mask;      ///< dropout multipliers (0 or 1/(1-p)); empty if p = 0
        Matrix output;    ///< block output fed to the next Dense
    };
    std::vector<Block> blocks;
    Matrix logits;
    bool training = false;
};

enum class Mode { Train, Eval };

/**
 * @brief Logits for a batch. Train mode uses batch statistics (and updates
 * the running ones) and samples dropout masks from `rng`; eval mode uses
 * running statistics and no dropout.
 */
inline ForwardCache probe_forward(ProbeModel& model, const Eigen::Ref<const Matrix>& x, Mode mode, nn::Rng* rng) {
    const ProbeSpec& spec = model.spec;
    if (x.cols() != spec.input_dim) {
        throw InvalidArgument("probe_forward: input has " + std::to_string(x.cols()) + " columns, expected " +
                              std::to_string(spec.input_dim));
    }
    const bool training = mode == Mode::Train;
    if (training && spec.dropout_p > 0.0 && !model.norms.empty() && rng == nullptr) {
        throw InvalidArgument("probe_forward: training mode needs an rng for dropout");
    }
    ForwardCache cache;
    cache.training = training;
    cache.input = x;
    const Matrix* h = &cache.input;
    const double batch = static_cast<double>(x.rows());
    for (std::size_t l = 0; l < model.norms.size(); ++l) {
        ForwardCache::Block block;
        Matrix z = (*h) * model.dense[l].weight;
        z.rowwise() += RowVector(model.dense[l].bias);
        BatchNormParams& bn = model.norms[l];
        RowVector mean;
        RowVector var;
        if (training) {
            if (x.rows() < 2) throw DegenerateStatistics("probe_forward: BN training needs a batch of at least 2");
            mean = z.colwise().mean();
            var = (z.rowwise() - mean).array().square().colwise().sum().matrix() / batch;
            const double m = spec.bn_momentum;
            bn.running_mean = (1.0 - m) * bn.running_mean + m * mean;
            bn.running_var = (1.0 - m) * bn.running_var + m * var * (batch / (batch - 1.0));
        } else {
            mean = bn.running_mean;
            var = bn.running_var;
        }
        block.inv_std = (var.array() + spec.bn_epsilon).sqrt().inverse().matrix();
        block.xhat = (z.rowwise() - mean).array().rowwise() * block.inv_std.array();
        block.bn_out = (block.xhat.array().rowwise() * RowVector(bn.gamma).array()).rowwise() + RowVector(bn.beta).array();
        block.output = nn::leaky_relu(block.bn_out, spec.leaky_slope);
        if (training && spec.dropout_p > 0.0) {
            const double keep_scale = 1.0 / (1.0 - spec.dropout_p);
            block.mask.resize(block.output.rows(), block.output.cols());
            for (Index k = 0; k < block.mask.size(); ++k) {
                block.mask.data()[k] = rng->uniform() < spec.dropout_p ? 0.0 : keep_scale;
            }
            block.output.array() *= block.mask.array();
        }
        cache.blocks.push_back(std::move(block));
        h = &cache.blocks.back().output;
    }
    cache.logits = (*h) * model.dense.back().weight;
    cache.logits.rowwise() += RowVector(model.dense.back().bias);
    return cache;
}

struct ProbeGradients {
    double loss = 0.0;
    std::vector<Matrix> grads;  ///< aligned with ProbeModel::parameters()
};

/// Exact gradients of the mean cross-entropy through a train-mode cache.
inline ProbeGradients probe_backward(const ProbeModel& model, const ForwardCache& cache, std::span<const int> labels) {
    const ProbeSpec& spec = model.spec;
    nn::LossAndGrad lg = nn::softmax_cross_entropy(cache.logits, labels);
    const std::size_t n_blocks = cache.blocks.size();
    // Gradients are produced back to front, then reordered.
    std::vector<Matrix> reversed;
    Matrix upstream = std::move(lg.grad);
    for (std::size_t l = n_blocks + 1; l-- > 0;) {
        const Matrix& layer_input = l == 0 ? cache.input : cache.blocks[l - 1].output;
        const DenseParams& d = model.dense[l];
        // dense: out = in W + b
        reversed.push_back(upstream.colwise().sum());         // db
        reversed.push_back(layer_input.transpose() * upstream);  // dW
        if (l == 0) break;
        Matrix grad_in = upstream * d.weight.transpose();
        const ForwardCache::Block& block = cache.blocks[l - 1];
        const BatchNormParams& bn = model.norms[l - 1];
        if (block.mask.size() != 0) grad_in.array() *= block.mask.array();
        for (Index k = 0; k < grad_in.size(); ++k) {
            if (!(block.bn_out.data()[k] > 0.0)) grad_in.data()[k] *= spec.leaky_slope;
        }
        // BN with batch statistics: y = gamma xhat + beta
        const Matrix dbeta = grad_in.colwise().sum();
        const Matrix dgamma = (grad_in.array() * block.xhat.array()).colwise().sum();
        reversed.push_back(dbeta);
        reversed.push_back(dgamma);
        const Matrix dxhat = grad_in.array().rowwise() * RowVector(bn.gamma).array();
        const double b = static_cast<double>(dxhat.rows());
        if (cache.training) {
            const RowVector sum_dxhat = dxhat.colwise().sum();
            const RowVector sum_dxhat_xhat = (dxhat.array() * block.xhat.array()).colwise().sum();
            Matrix dz = (b * dxhat.array()).matrix();
            dz.rowwise() -= sum_dxhat;
            dz.array() -= block.xhat.array().rowwise() * sum_dxhat_xhat.array();
            dz.array().rowwise() *= (block.inv_std.array() / b);
            upstream = std::move(dz);
        } else {
            upstream = dxhat.array().rowwise() * block.inv_std.array();
        }
    }
    ProbeGradients out;
    out.loss = lg.loss;
    // reversed holds, from the last layer back: db, dW, [dbeta, dgamma], ...
    std::vector<Matrix> ordered(reversed.rbegin(), reversed.rend());
    out.grads = std::move(ordered);
    return out;
}

inline void adam_step(ProbeModel& model, const ProbeGradients& grads) {
    const auto params = model.parameters();
    model.optimizer.step(params, grads.grads);
}

/// Eval-mode predictions (argmax, ties to the lowest class).
inline std::vector<int> predict(ProbeModel& model, const Eigen::Ref<const Matrix>& x, Index chunk = 1024) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(x.rows()));
    for (Index start = 0; start < x.rows(); start += chunk) {
        const Index n = std::min(chunk, x.rows() - start);
        const ForwardCache c = probe_forward(model, x.middleRows(start, n), Mode::Eval, nullptr);
        for (Index i = 0; i < n; ++i) out.push_back(nn::argmax_row(c.logits.row(i)));
    }
    return out;
}

/// Percentage of correct eval-mode predictions.
inline double accuracy(ProbeModel& model, const Eigen::Ref<const Matrix>& x, std::span<const int> labels) {
    if (x.rows() == 0) throw EmptySetError("accuracy: empty split");
    const auto pred = predict(model, x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i] ? 1 : 0;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

/// Mean eval-mode cross-entropy.
inline double evaluate_loss(ProbeModel& model, const Eigen::Ref<const Matrix>& x, std::span<const int> labels) {
    const ForwardCache c = probe_forward(model, x, Mode::Eval, nullptr);
    return nn::softmax_cross_entropy(c.logits, labels).loss;
}

}  // namespace rsf::probes
