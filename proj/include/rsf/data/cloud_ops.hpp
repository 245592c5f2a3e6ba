#pragma once

#include <cmath>
#include <numbers>

#include "rsf/data/point_cloud.hpp"
#include "rsf/nn/rng.hpp"

namespace rsf::data {

using Rotation = Eigen::Matrix3d;

/// Center at the centroid and scale so the farthest point has norm 1.
/// A cloud whose points all coincide collapses to the origin.
inline Matrix normalize_points(const Matrix& points) {
    if (points.rows() < 1) throw EmptySetError("normalize_cloud: no points");
    Matrix out = points.rowwise() - points.colwise().mean();
    const double radius = out.rowwise().norm().maxCoeff();
    if (radius > 1e-300) {
        out /= radius;
    } else {
        out.setZero();
    }
    return out;
}

inline PointCloud normalize_cloud(PointCloud cloud) {
    cloud.points = normalize_points(cloud.points);
    return cloud;
}

/// Uniform rotation on SO(3) from a uniformly sampled unit quaternion (Shoemake).
inline Rotation random_rotation(nn::Rng& rng) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    const double two_pi = 2.0 * std::numbers::pi;
    const double a = std::sqrt(1.0 - u1);
    const double b = std::sqrt(u1);
    const double x = a * std::sin(two_pi * u2);
    const double y = a * std::cos(two_pi * u2);
    const double z = b * std::sin(two_pi * u3);
    const double w = b * std::cos(two_pi * u3);
    Rotation r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
         2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
         2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
    return r;
}

/// Apply p -> R p to every point of a 3-D cloud.
inline PointCloud rotate_cloud(PointCloud cloud, const Rotation& r) {
    if (cloud.points.cols() != 3) throw InvalidArgument("rotate_cloud: cloud must be 3-D");
    cloud.points = cloud.points * r.transpose();
    return cloud;
}

}  // namespace rsf::data
