#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rsf/error.hpp"
#include "rsf/nn/matrix.hpp"
#include "rsf/nn/rng.hpp"

namespace rsf::analysis {

using nn::Index;
using nn::Matrix;

struct TsneParams {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 100.0;
    double early_exaggeration = 12.0;
    int exaggeration_iterations = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch = 250;
    double init_scale = 1e-4;
    double min_gain = 0.01;
    int kl_every = 50;  ///< KL is sampled every kl_every iterations into the trace
    std::uint64_t seed = 0;
};

inline void validate(const TsneParams& p, Index n) {
    if (n < 5) throw InvalidArgument("tsne: need at least 5 points, got " + std::to_string(n));
    if (!(p.perplexity > 1.0) || !(p.perplexity < static_cast<double>(n) / 3.0)) {
        throw InvalidArgument("tsne: perplexity " + std::to_string(p.perplexity) + " infeasible for N = " + std::to_string(n) +
                              " (need 1 < perplexity < N/3)");
    }
    if (p.iterations < 250) throw InvalidArgument("tsne: iterations must be >= 250");
    if (!(p.learning_rate > 0.0)) throw InvalidArgument("tsne: learning_rate must be positive");
    if (p.early_exaggeration < 1.0 || p.exaggeration_iterations < 0 || p.momentum_switch < 0) {
        throw InvalidArgument("tsne: invalid exaggeration/momentum schedule");
    }
    if (p.early_exaggeration > 1.0 && p.exaggeration_iterations >= p.iterations) {
        throw InvalidArgument("tsne: iterations (" + std::to_string(p.iterations) +
                              ") must exceed exaggeration_iterations (" + std::to_string(p.exaggeration_iterations) + ")");
    }
    if (p.kl_every < 1) throw InvalidArgument("tsne: kl_every must be >= 1");
}

/// Conditional affinities P(j|i) (rows sum to 1, zero diagonal) with the
/// Shannon entropy each row reached.
struct Affinities {
    Matrix conditional;
    std::vector<double> entropy;
    std::vector<double> beta;  ///< precision 1 / (2 sigma^2) per row
};

inline Matrix pairwise_squared_distances(const Matrix& x) {
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    Matrix d = -2.0 * x * x.transpose();
    d.colwise() += sq;
    d.rowwise() += sq.transpose();
    d = d.cwiseMax(0.0);
    d.diagonal().setZero();
    return d;
}

/**
 * @brief Per-row bandwidth search: bisection on the Gaussian precision until
 * the row entropy (nats) matches ln(perplexity).
 *
 * Rows whose entropy cannot reach the target (e.g. all neighbours
 * equidistant) end at the closest attainable value; callers can inspect
 * `entropy` to see the residual.
 */
inline Affinities calibrate_affinities(const Matrix& sq_dist, double perplexity, double tol = 1e-10, int max_steps = 200) {
    const Index n = sq_dist.rows();
    const double target = std::log(perplexity);
    Affinities out;
    out.conditional = Matrix::Zero(n, n);
    out.entropy.assign(static_cast<std::size_t>(n), 0.0);
    out.beta.assign(static_cast<std::size_t>(n), 1.0);
    std::vector<double> d(static_cast<std::size_t>(n));
    std::vector<double> p(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < n; ++j) {
            if (j != i) dmin = std::min(dmin, sq_dist(i, j));
        }
        for (Index j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = sq_dist(i, j) - dmin;

        // Entropy of the row at precision b, with distances shifted by their
        // minimum so the largest weight is exactly 1.
        auto row_entropy = [&](double b) {
            double z = 0.0;
            double dp = 0.0;
            for (Index j = 0; j < n; ++j) {
                if (j == i) {
                    p[static_cast<std::size_t>(j)] = 0.0;
                    continue;
                }
                const double w = std::exp(-b * d[static_cast<std::size_t>(j)]);
                p[static_cast<std::size_t>(j)] = w;
                z += w;
                dp += w * d[static_cast<std::size_t>(j)];
            }
            return std::log(z) + b * dp / z;
        };

        double beta = 1.0;
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        double h = row_entropy(beta);
        for (int step = 0; step < max_steps && std::abs(h - target) > tol; ++step) {
            if (h > target) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
            h = row_entropy(beta);
        }
        double z = 0.0;
        for (double w : p) z += w;
        for (Index j = 0; j < n; ++j) out.conditional(i, j) = p[static_cast<std::size_t>(j)] / z;
        out.entropy[static_cast<std::size_t>(i)] = h;
        out.beta[static_cast<std::size_t>(i)] = beta;
    }
    return out;
}

/// Joint affinities (P + P^T) / 2N, floored at 1e-12 off the diagonal.
inline Matrix joint_affinities(const Affinities& aff) {
    const Index n = aff.conditional.rows();
    Matrix p = (aff.conditional + aff.conditional.transpose()) / (2.0 * static_cast<double>(n));
    p = p.cwiseMax(1e-12);
    p.diagonal().setZero();
    return p;
}

struct TsneResult {
    Matrix coords;  ///< N x 2
    double initial_kl = 0.0;
    double final_kl = 0.0;
    double max_entropy_error = 0.0;  ///< max_i |H(P_i) - ln(perplexity)|
    std::vector<std::pair<int, double>> kl_trace;  ///< (iteration, KL) samples
};

namespace detail {

/// Student-t kernel 1 / (1 + |yi - yj|^2) with zero diagonal.
inline Matrix student_kernel(const Matrix& y) {
    Matrix num = pairwise_squared_distances(y);
    num = (1.0 + num.array()).inverse().matrix();
    num.diagonal().setZero();
    return num;
}

inline double kl_divergence(const Matrix& p, const Matrix& num) {
    const double z = num.sum();
    double kl = 0.0;
    for (Index i = 0; i < p.rows(); ++i) {
        for (Index j = 0; j < p.cols(); ++j) {
            if (i == j) continue;
            const double pij = p(i, j);
            const double qij = std::max(num(i, j) / z, 1e-12);
            kl += pij * std::log(pij / qij);
        }
    }
    return kl;
}

}  // namespace detail

/**
 * @brief Exact t-SNE to two dimensions.
 *
 * Gradient descent with momentum, per-coordinate gains and early
 * exaggeration; the embedding is re-centred after every step. Deterministic
 * for fixed params.seed.
 */
inline TsneResult tsne(const Matrix& x, const TsneParams& params = {}) {
    validate(params, x.rows());
    nn::require_finite(x, "tsne input");
    const Index n = x.rows();
    const Affinities aff = calibrate_affinities(pairwise_squared_distances(x), params.perplexity);
    const Matrix p = joint_affinities(aff);

    TsneResult out;
    const double target = std::log(params.perplexity);
    for (double h : aff.entropy) out.max_entropy_error = std::max(out.max_entropy_error, std::abs(h - target));

    nn::Rng rng(params.seed);
    Matrix y(n, 2);
    for (Index k = 0; k < y.size(); ++k) y.data()[k] = params.init_scale * rng.normal();
    Matrix update = Matrix::Zero(n, 2);
    Matrix gains = Matrix::Ones(n, 2);

    out.initial_kl = detail::kl_divergence(p, detail::student_kernel(y));
    out.kl_trace.emplace_back(0, out.initial_kl);

    for (int it = 0; it < params.iterations; ++it) {
        const double exaggeration = it < params.exaggeration_iterations ? params.early_exaggeration : 1.0;
        const double momentum = it < params.momentum_switch ? params.initial_momentum : params.final_momentum;
        const Matrix num = detail::student_kernel(y);
        const double z = num.sum();
        // PQ_ij = (exag P_ij - Q_ij) * num_ij; grad_i = 4 sum_j PQ_ij (y_i - y_j).
        const Matrix pq = ((exaggeration * p).array() - num.array() / z).matrix().cwiseProduct(num);
        const Eigen::VectorXd row = pq.rowwise().sum();
        const Matrix grad = 4.0 * (row.asDiagonal() * y - pq * y);

        for (Index k = 0; k < y.size(); ++k) {
            double& g = gains.data()[k];
            const bool same_sign = (grad.data()[k] > 0.0) == (update.data()[k] > 0.0);
            g = same_sign ? g * 0.8 : g + 0.2;
            g = std::max(g, params.min_gain);
            update.data()[k] = momentum * update.data()[k] - params.learning_rate * g * grad.data()[k];
        }
        y += update;
        y.rowwise() -= y.colwise().mean();
        if (!y.allFinite()) throw NumericError("tsne: non-finite coordinates at iteration " + std::to_string(it + 1));
        if ((it + 1) % params.kl_every == 0) {
            out.kl_trace.emplace_back(it + 1, detail::kl_divergence(p, detail::student_kernel(y)));
        }
    }
    out.final_kl = detail::kl_divergence(p, detail::student_kernel(y));
    out.coords = std::move(y);
    return out;
}

}  // namespace rsf::analysis
