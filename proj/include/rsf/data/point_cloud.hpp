#pragma once

#include <string>
#include <vector>

#include "rsf/nn/matrix.hpp"

namespace rsf::data {

using nn::Index;
using nn::Matrix;

/// n x d point coordinates (d = 2 or 3) with a class label and a stable id.
struct PointCloud {
    Matrix points;
    int label = 0;
    std::string id;

    Index size() const { return points.rows(); }
    Index dim() const { return points.cols(); }
};

inline void validate_cloud(const PointCloud& cloud) {
    if (cloud.points.rows() < 1) throw EmptySetError("point cloud '" + cloud.id + "' has no points");
    if (cloud.points.cols() != 2 && cloud.points.cols() != 3) {
        throw InvalidArgument("point cloud '" + cloud.id + "' has dimension " +
                              std::to_string(cloud.points.cols()) + "; expected 2 or 3");
    }
    if (!cloud.points.allFinite()) throw InvalidArgument("point cloud '" + cloud.id + "' has non-finite coordinates");
}

}  // namespace rsf::data
