#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "rsf/data/cloud_ops.hpp"
#include "rsf/data/idx.hpp"

namespace rsf::data {

struct MnistSampling {
    int n_points = 512;
    int threshold = 127;  ///< a pixel is "white" when intensity > threshold
    bool normalize = true;
};

/**
 * @brief Turn a grayscale image into a 2-D point cloud by rejection sampling.
 *
 * Pixels are proposed uniformly over the whole image and accepted when
 * brighter than the threshold (so accepted pixels are uniform over the
 * foreground, with replacement). Each accepted pixel (row, col) yields
 * (col + u, rows - row - v) with u, v ~ U[0, 1): sub-pixel jitter, y axis
 * pointing up. The cloud is then centered and scaled to unit radius.
 */
inline PointCloud mnist_to_pointcloud(std::span<const std::uint8_t> image, std::size_t rows, std::size_t cols,
                                      nn::Rng& rng, const MnistSampling& opts = {}) {
    if (image.size() != rows * cols || rows == 0 || cols == 0) throw InvalidArgument("mnist_to_pointcloud: image size mismatch");
    if (opts.n_points < 1) throw InvalidArgument("mnist_to_pointcloud: n_points must be >= 1");
    bool any = false;
    for (auto v : image) any = any || v > opts.threshold;
    if (!any) throw InvalidArgument("mnist_to_pointcloud: image has no foreground pixels");

    PointCloud cloud;
    cloud.points.resize(opts.n_points, 2);
    for (int k = 0; k < opts.n_points;) {
        const auto idx = static_cast<std::size_t>(rng.below(rows * cols));
        if (image[idx] <= opts.threshold) continue;
        const double row = static_cast<double>(idx / cols);
        const double col = static_cast<double>(idx % cols);
        const double u = rng.uniform();
        const double v = rng.uniform();
        cloud.points(k, 0) = col + u;
        cloud.points(k, 1) = static_cast<double>(rows) - row - v;
        ++k;
    }
    if (opts.normalize) cloud.points = normalize_points(cloud.points);
    return cloud;
}

}  // namespace rsf::data
