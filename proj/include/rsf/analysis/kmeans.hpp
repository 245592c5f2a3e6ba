#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rsf/error.hpp"
#include "rsf/nn/matrix.hpp"
#include "rsf/nn/rng.hpp"

namespace rsf::analysis {

using nn::Index;
using nn::Matrix;
using nn::RowVector;

struct ClusterAssignment {
    std::vector<int> labels;
    Matrix centroids;  ///< k x d
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_trace;  ///< inertia after each assignment step of the winning restart
};

struct KMeansOptions {
    int n_init = 10;
    int max_iterations = 300;
};

namespace detail {

/// Squared distances from every row of x to every row of c (N x k).
inline Matrix squared_distances(const Matrix& x, const Matrix& c) {
    const Eigen::VectorXd xn = x.rowwise().squaredNorm();
    const RowVector cn = c.rowwise().squaredNorm().transpose();
    Matrix d = -2.0 * x * c.transpose();
    d.colwise() += xn;
    d.rowwise() += cn;
    return d.cwiseMax(0.0);
}

/// k-means++ seeding: first center uniform, then D^2 sampling.
inline Matrix seed_centers(const Matrix& x, int k, nn::Rng& rng) {
    const Index n = x.rows();
    Matrix centers(k, x.cols());
    centers.row(0) = x.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    Eigen::VectorXd closest = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = closest.sum();
        Index pick = 0;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (Index i = 0; i < n; ++i) {
                acc += closest[i];
                if (acc > r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centers.row(c) = x.row(pick);
        closest = closest.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

inline ClusterAssignment lloyd(const Matrix& x, Matrix centers, int max_iterations) {
    const Index n = x.rows();
    const int k = static_cast<int>(centers.rows());
    ClusterAssignment out;
    out.labels.assign(static_cast<std::size_t>(n), -1);
    std::vector<double> point_cost(static_cast<std::size_t>(n));
    for (int it = 0; it < max_iterations; ++it) {
        const Matrix d = squared_distances(x, centers);
        bool changed = false;
        double inertia = 0.0;
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            for (int c = 1; c < k; ++c) {
                if (d(i, c) < d(i, best)) best = c;
            }
            changed = changed || out.labels[static_cast<std::size_t>(i)] != best;
            out.labels[static_cast<std::size_t>(i)] = best;
            const double cost = (x.row(i) - centers.row(best)).squaredNorm();
            point_cost[static_cast<std::size_t>(i)] = cost;
            inertia += cost;
        }
        out.inertia_trace.push_back(inertia);
        out.iterations = it + 1;
        if (!changed && it > 0) break;

        Matrix sums = Matrix::Zero(k, x.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            const int c = out.labels[static_cast<std::size_t>(i)];
            sums.row(c) += x.row(i);
            ++counts[static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
                continue;
            }
            // Empty cluster: move it onto the point farthest from its centroid.
            Index far = 0;
            for (Index i = 1; i < n; ++i) {
                if (point_cost[static_cast<std::size_t>(i)] > point_cost[static_cast<std::size_t>(far)]) far = i;
            }
            centers.row(c) = x.row(far);
            point_cost[static_cast<std::size_t>(far)] = 0.0;
            out.labels[static_cast<std::size_t>(far)] = c;
        }
    }
    out.centroids = std::move(centers);
    out.inertia = out.inertia_trace.back();
    return out;
}

}  // namespace detail

/**
 * @brief K-Means with k-means++ seeding; the restart with the lowest inertia wins.
 *
 * Each restart alternates assignment and centroid updates until the
 * assignment stops changing or max_iterations is reached. Distance ties go
 * to the lowest cluster index.
 */
inline ClusterAssignment kmeans_pp(const Matrix& x, int k, nn::Rng& rng, const KMeansOptions& opts = {}) {
    if (k < 1) throw InvalidArgument("kmeans_pp: k must be >= 1");
    if (k > x.rows()) throw InvalidArgument("kmeans_pp: k = " + std::to_string(k) + " exceeds N = " + std::to_string(x.rows()));
    if (opts.n_init < 1 || opts.max_iterations < 1) throw InvalidArgument("kmeans_pp: n_init and max_iterations must be >= 1");
    ClusterAssignment best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < opts.n_init; ++restart) {
        ClusterAssignment run = detail::lloyd(x, detail::seed_centers(x, k, rng), opts.max_iterations);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

}  // namespace rsf::analysis
