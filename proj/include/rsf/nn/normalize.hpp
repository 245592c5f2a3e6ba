#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/nn/matrix.hpp"

namespace rsf::nn {

enum class NormKind { BN, IN, LN, NN };

/// Parameter-free normalization: statistics only, no scale or shift.
struct Normalization {
    NormKind kind = NormKind::NN;
    double epsilon = 1e-5;

    bool operator==(const Normalization&) const = default;
};

inline std::string_view to_string(NormKind kind) {
    switch (kind) {
        case NormKind::BN: return "BN";
        case NormKind::IN: return "IN";
        case NormKind::LN: return "LN";
        case NormKind::NN: return "NN";
    }
    return "NN";
}

inline NormKind parse_norm_kind(std::string_view name) {
    if (name == "BN" || name == "bn") return NormKind::BN;
    if (name == "IN" || name == "in") return NormKind::IN;
    if (name == "LN" || name == "ln") return NormKind::LN;
    if (name == "NN" || name == "nn") return NormKind::NN;
    throw InvalidArgument("unknown normalization '" + std::string(name) + "'");
}

namespace detail {

inline void standardize_columns(Eigen::Ref<Matrix> block, double eps) {
    const double n = static_cast<double>(block.rows());
    const RowVector mean = block.colwise().sum() / n;
    block.rowwise() -= mean;
    const RowVector inv_std =
        ((block.array().square().colwise().sum() / n) + eps).sqrt().inverse().matrix();
    block.array().rowwise() *= inv_std.array();
}

}  // namespace detail

/**
 * @brief Normalize a stacked batch of clouds in place.
 *
 * `x` holds the per-point features of every cloud in the batch stacked
 * vertically; cloud c owns rows [offsets[c], offsets[c+1]). Statistics:
 *  - IN: per cloud, per channel, over that cloud's points
 *  - LN: per point, over channels
 *  - BN: per channel, over every row of the batch
 *  - NN: identity
 * Variances are biased (divide by count) and guarded by `epsilon`.
 */
inline void normalize_batch(Matrix& x, std::span<const Index> offsets, Normalization norm) {
    if (!(norm.epsilon > 0.0)) throw InvalidArgument("normalize: epsilon must be positive");
    if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != x.rows()) {
        throw InvalidArgument("normalize: offsets do not partition the batch rows");
    }
    switch (norm.kind) {
        case NormKind::NN: return;
        case NormKind::IN:
            for (std::size_t c = 0; c + 1 < offsets.size(); ++c) {
                const Index n = offsets[c + 1] - offsets[c];
                if (n < 1) throw EmptySetError("normalize(IN): empty cloud in batch");
                detail::standardize_columns(x.middleRows(offsets[c], n), norm.epsilon);
            }
            return;
        case NormKind::LN: {
            const double d = static_cast<double>(x.cols());
            for (Index i = 0; i < x.rows(); ++i) {
                auto row = x.row(i);
                const double mean = row.sum() / d;
                row.array() -= mean;
                const double var = row.squaredNorm() / d;
                row /= std::sqrt(var + norm.epsilon);
            }
            return;
        }
        case NormKind::BN:
            if (x.rows() < 2) {
                throw DegenerateStatistics("normalize(BN): need at least 2 positions per channel, got " +
                                           std::to_string(x.rows()));
            }
            detail::standardize_columns(x, norm.epsilon);
            return;
    }
}

/// Normalize a single feature matrix treated as one cloud (BN then runs over its rows).
inline Matrix normalize(const Eigen::Ref<const Matrix>& x, Normalization norm) {
    Matrix out = x;
    const std::vector<Index> offsets{0, x.rows()};
    normalize_batch(out, offsets, norm);
    return out;
}

}  // namespace rsf::nn
