#pragma once

#include <cmath>
#include <span>

#include "rsf/nn/matrix.hpp"

namespace rsf::nn {

struct LossAndGrad {
    double loss = 0.0;
    Matrix grad;  ///< d loss / d logits
};

/// Mean softmax cross-entropy over the batch; grad = (softmax - onehot) / B.
inline LossAndGrad softmax_cross_entropy(const Eigen::Ref<const Matrix>& logits,
                                         std::span<const int> labels) {
    const Index batch = logits.rows();
    const Index classes = logits.cols();
    if (static_cast<Index>(labels.size()) != batch) {
        throw InvalidArgument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                              " labels for " + std::to_string(batch) + " rows");
    }
    if (batch == 0) throw EmptySetError("softmax_cross_entropy: empty batch");
    LossAndGrad out;
    out.grad.resize(batch, classes);
    double total = 0.0;
    for (Index i = 0; i < batch; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= classes) {
            throw InvalidArgument("softmax_cross_entropy: label " + std::to_string(y) +
                                  " outside [0, " + std::to_string(classes) + ")");
        }
        const double shift = logits.row(i).maxCoeff();
        double z = 0.0;
        for (Index k = 0; k < classes; ++k) {
            const double e = std::exp(logits(i, k) - shift);
            out.grad(i, k) = e;
            z += e;
        }
        total += std::log(z) - (logits(i, y) - shift);
        out.grad.row(i) /= z;
        out.grad(i, y) -= 1.0;
    }
    out.grad /= static_cast<double>(batch);
    out.loss = total / static_cast<double>(batch);
    return out;
}

/// Row-wise argmax; ties resolve to the lowest class index.
inline int argmax_row(const Eigen::Ref<const RowVector>& row) {
    int best = 0;
    for (Index k = 1; k < row.size(); ++k) {
        if (row[k] > row[best]) best = static_cast<int>(k);
    }
    return best;
}

}  // namespace rsf::nn
