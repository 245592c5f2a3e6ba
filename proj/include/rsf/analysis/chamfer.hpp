#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rsf/error.hpp"
#include "rsf/nn/matrix.hpp"

namespace rsf::analysis {

using nn::Index;
using nn::Matrix;

namespace detail {

inline void check_clouds(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b, const char* who) {
    if (a.rows() == 0 || b.rows() == 0) throw EmptySetError(std::string(who) + ": empty cloud");
    if (a.cols() != b.cols()) {
        throw InvalidArgument(std::string(who) + ": dimension mismatch " + std::to_string(a.cols()) + " vs " +
                              std::to_string(b.cols()));
    }
}

/// For every row of `from`, the index of its nearest row in `to` and the
/// squared distance. Ties go to the lowest index.
inline void nearest(const Eigen::Ref<const Matrix>& from, const Eigen::Ref<const Matrix>& to, std::vector<Index>& idx,
                    std::vector<double>& dist) {
    const Index d = from.cols();
    idx.assign(static_cast<std::size_t>(from.rows()), 0);
    dist.assign(static_cast<std::size_t>(from.rows()), std::numeric_limits<double>::infinity());
    for (Index i = 0; i < from.rows(); ++i) {
        const double* p = from.row(i).data();
        double best = std::numeric_limits<double>::infinity();
        Index best_j = 0;
        for (Index j = 0; j < to.rows(); ++j) {
            const double* q = to.row(j).data();
            double s = 0.0;
            for (Index k = 0; k < d; ++k) {
                const double diff = p[k] - q[k];
                s += diff * diff;
            }
            if (s < best) {
                best = s;
                best_j = j;
            }
        }
        idx[static_cast<std::size_t>(i)] = best_j;
        dist[static_cast<std::size_t>(i)] = best;
    }
}

}  // namespace detail

/**
 * @brief Symmetric Chamfer distance with squared Euclidean distances:
 * mean_a min_b |a - b|^2 + mean_b min_a |a - b|^2.
 */
inline double chamfer(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
    detail::check_clouds(a, b, "chamfer");
    std::vector<Index> idx;
    std::vector<double> dist;
    double ab = 0.0;
    detail::nearest(a, b, idx, dist);
    for (double v : dist) ab += v;
    double ba = 0.0;
    detail::nearest(b, a, idx, dist);
    for (double v : dist) ba += v;
    return ab / static_cast<double>(a.rows()) + ba / static_cast<double>(b.rows());
}

/// Chamfer value and its gradient with respect to the predicted points.
struct ChamferGrad {
    double loss = 0.0;
    Matrix grad;  ///< same shape as the prediction
};

/**
 * @brief Gradient of chamfer(pred, gt) with respect to pred.
 *
 * Point p gets 2(p - nn_gt(p)) / |pred| from its own term and
 * 2(p - g) / |gt| for every ground-truth g whose nearest prediction is p.
 */
inline ChamferGrad chamfer_backward(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& gt) {
    detail::check_clouds(pred, gt, "chamfer_backward");
    ChamferGrad out;
    out.grad = Matrix::Zero(pred.rows(), pred.cols());
    std::vector<Index> idx;
    std::vector<double> dist;

    const double inv_p = 1.0 / static_cast<double>(pred.rows());
    detail::nearest(pred, gt, idx, dist);
    double ab = 0.0;
    for (Index i = 0; i < pred.rows(); ++i) {
        ab += dist[static_cast<std::size_t>(i)];
        out.grad.row(i) += 2.0 * inv_p * (pred.row(i) - gt.row(idx[static_cast<std::size_t>(i)]));
    }

    const double inv_g = 1.0 / static_cast<double>(gt.rows());
    detail::nearest(gt, pred, idx, dist);
    double ba = 0.0;
    for (Index j = 0; j < gt.rows(); ++j) {
        ba += dist[static_cast<std::size_t>(j)];
        const Index p = idx[static_cast<std::size_t>(j)];
        out.grad.row(p) += 2.0 * inv_g * (pred.row(p) - gt.row(j));
    }
    out.loss = ab * inv_p + ba * inv_g;
    return out;
}

}  // namespace rsf::analysis
