#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rsf/data/point_cloud.hpp"
#include "rsf/encoders/spec.hpp"
#include "rsf/nn/init.hpp"
#include "rsf/nn/layers.hpp"
#include "rsf/nn/normalize.hpp"
#include "rsf/nn/rng.hpp"

namespace rsf::encoders {

using nn::Matrix;
using nn::RowVector;

/// One per-point layer. `context` is the max-context matrix of DeepSets
/// layers and is empty for every other family.
struct Layer {
    Matrix weight;
    RowVector bias;
    Matrix context;

    bool operator==(const Layer&) const = default;
};

/// Frozen random weights of a set encoder. Immutable after construction.
class EncoderParams {
  public:
    /// Wrap explicit layers (e.g. hand-picked weights); shapes are checked.
    static EncoderParams from_layers(EncoderSpec spec, std::vector<Layer> layers) {
        validate(spec);
        if (layers.size() != spec.widths.size()) {
            throw InvalidArgument("encoder has " + std::to_string(layers.size()) + " layers but spec lists " +
                                  std::to_string(spec.widths.size()) + " widths");
        }
        Index in = spec.input_dim;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const Layer& layer = layers[l];
            const Index out = spec.widths[l];
            if (layer.weight.rows() != in || layer.weight.cols() != out || layer.bias.size() != out) {
                throw InvalidArgument("encoder layer " + std::to_string(l) + " has shape " +
                                      nn::shape_string(layer.weight.rows(), layer.weight.cols()) + ", expected " +
                                      nn::shape_string(in, out));
            }
            const bool needs_context = spec.family == Family::DeepSets;
            if (needs_context && (layer.context.rows() != in || layer.context.cols() != out)) {
                throw InvalidArgument("DeepSets layer " + std::to_string(l) + " context has wrong shape");
            }
            if (!needs_context && layer.context.size() != 0) {
                throw InvalidArgument("only DeepSets layers carry a context matrix");
            }
            in = out;
        }
        return EncoderParams(std::move(spec), std::move(layers));
    }

    const EncoderSpec& spec() const { return spec_; }
    const std::vector<Layer>& layers() const { return layers_; }
    Index output_dim() const { return spec_.widths.back(); }

    bool operator==(const EncoderParams&) const = default;

  private:
    EncoderParams(EncoderSpec spec, std::vector<Layer> layers) : spec_(std::move(spec)), layers_(std::move(layers)) {}

    EncoderSpec spec_;
    std::vector<Layer> layers_;
};

/**
 * @brief Expand a spec into Glorot-initialized weights (biases zero).
 *
 * Weights are drawn layer by layer from one stream seeded by spec.seed,
 * W before V for DeepSets layers.
 */
inline EncoderParams build_encoder(const EncoderSpec& spec) {
    validate(spec);
    nn::Rng rng(spec.seed);
    std::vector<Layer> layers;
    Index in = spec.input_dim;
    for (Index out : spec.widths) {
        Layer layer;
        layer.weight = nn::init_weights(spec.init, in, out, rng);
        layer.bias = RowVector::Zero(out);
        if (spec.family == Family::DeepSets) layer.context = nn::init_weights(spec.init, in, out, rng);
        layers.push_back(std::move(layer));
        in = out;
    }
    return EncoderParams::from_layers(spec, std::move(layers));
}

namespace detail {

inline bool uses_activation(Family family) { return family == Family::PointNet || family == Family::DeepSets; }

/// Per-point features of a stacked batch after the full layer stack.
inline Matrix forward_points(const EncoderParams& params, const Matrix& stacked, std::span<const Index> offsets) {
    const EncoderSpec& spec = params.spec();
    const std::size_t n_clouds = offsets.size() - 1;
    Matrix h = stacked;
    for (const Layer& layer : params.layers()) {
        Matrix next(h.rows(), layer.weight.cols());
        // One product per cloud keeps every cloud's arithmetic independent of
        // what else is in the batch.
        for (std::size_t c = 0; c < n_clouds; ++c) {
            const Index begin = offsets[c];
            const Index n = offsets[c + 1] - begin;
            auto block = next.middleRows(begin, n);
            block.noalias() = h.middleRows(begin, n) * layer.weight;
            block.rowwise() += layer.bias;
            if (spec.family == Family::DeepSets) {
                const RowVector ctx = nn::maxpool_set(h.middleRows(begin, n)) * layer.context;
                block.rowwise() += ctx;
            }
        }
        nn::normalize_batch(next, offsets, spec.norm);
        if (uses_activation(spec.family)) nn::relu_inplace(next);
        h = std::move(next);
    }
    return h;
}

/// Row indices of `points` in lexicographic order. Feeding points in this
/// order makes the per-cloud sums inside the normalizations independent of
/// the input ordering, so permuted clouds embed to bit-identical vectors.
inline std::vector<Index> canonical_order(const Matrix& points) {
    std::vector<Index> order(static_cast<std::size_t>(points.rows()));
    for (Index i = 0; i < points.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&points](Index a, Index b) {
        for (Index k = 0; k < points.cols(); ++k) {
            if (points(a, k) != points(b, k)) return points(a, k) < points(b, k);
        }
        return false;
    });
    return order;
}

}  // namespace detail

/**
 * @brief Embed a batch of clouds; row c of the result is cloud c's embedding.
 *
 * Each embedding is the column-wise max over the cloud's per-point features.
 * Only BN couples clouds; for every other normalization the rows do not
 * depend on batch composition.
 */
inline Matrix embed(const EncoderParams& params, std::span<const data::PointCloud> clouds) {
    const EncoderSpec& spec = params.spec();
    if (clouds.empty()) throw EmptySetError("embed: empty batch");
    if (spec.norm.kind == nn::NormKind::BN && clouds.size() < 2) {
        throw DegenerateStatistics("embed: BN encoders need a batch of at least 2 clouds");
    }
    std::vector<Index> offsets{0};
    for (const auto& cloud : clouds) {
        if (cloud.points.rows() < 1) throw EmptySetError("embed: cloud '" + cloud.id + "' is empty");
        if (cloud.points.cols() != spec.input_dim) {
            throw InvalidArgument("embed: cloud '" + cloud.id + "' has dimension " + std::to_string(cloud.points.cols()) +
                                  ", encoder expects " + std::to_string(spec.input_dim));
        }
        if (!cloud.points.allFinite()) throw InvalidArgument("embed: cloud '" + cloud.id + "' has non-finite coordinates");
        offsets.push_back(offsets.back() + cloud.points.rows());
    }
    Matrix stacked(offsets.back(), spec.input_dim);
    for (std::size_t c = 0; c < clouds.size(); ++c) {
        const auto order = detail::canonical_order(clouds[c].points);
        for (std::size_t i = 0; i < order.size(); ++i) {
            stacked.row(offsets[c] + static_cast<Index>(i)) = clouds[c].points.row(order[i]);
        }
    }
    const Matrix features = detail::forward_points(params, stacked, offsets);
    Matrix out(static_cast<Index>(clouds.size()), params.output_dim());
    for (std::size_t c = 0; c < clouds.size(); ++c) {
        out.row(static_cast<Index>(c)) = nn::maxpool_set(features.middleRows(offsets[c], offsets[c + 1] - offsets[c]));
    }
    return out;
}

inline RowVector embed_one(const EncoderParams& params, const data::PointCloud& cloud) {
    return embed(params, std::span<const data::PointCloud>(&cloud, 1)).row(0);
}

}  // namespace rsf::encoders
