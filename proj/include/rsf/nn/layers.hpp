#pragma once

#include <algorithm>

#include "rsf/nn/matrix.hpp"

namespace rsf::nn {

/// Shared affine map applied to every row: out_i = x_i * W + b.
inline Matrix pointwise_linear(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& w,
                               const Eigen::Ref<const RowVector>& b) {
    if (x.cols() != w.rows() || b.size() != w.cols()) {
        throw InvalidArgument("pointwise_linear: X " + shape_string(x.rows(), x.cols()) + ", W " +
                              shape_string(w.rows(), w.cols()) + ", b " + std::to_string(b.size()));
    }
    Matrix out = x * w;
    out.rowwise() += b;
    return out;
}

inline Matrix leaky_relu(const Eigen::Ref<const Matrix>& x, double slope) {
    if (!(slope >= 0.0 && slope < 1.0)) throw InvalidArgument("leaky_relu: slope must be in [0, 1)");
    return x.unaryExpr([slope](double v) { return std::max(v, slope * v); });
}

inline Matrix relu(const Eigen::Ref<const Matrix>& x) {
    return x.unaryExpr([](double v) { return std::max(v, 0.0); });
}

inline void relu_inplace(Eigen::Ref<Matrix> x) {
    x = x.unaryExpr([](double v) { return std::max(v, 0.0); });
}

/// Column-wise maximum over the rows (points) of x.
inline RowVector maxpool_set(const Eigen::Ref<const Matrix>& x) {
    if (x.rows() == 0) throw EmptySetError("maxpool_set: set has no points");
    RowVector out = x.row(0);
    for (Index i = 1; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) out[j] = std::max(out[j], x(i, j));
    }
    return out;
}

}  // namespace rsf::nn
