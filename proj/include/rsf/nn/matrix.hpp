#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string>

#include "rsf/error.hpp"

namespace rsf::nn {

using Index = Eigen::Index;

/// Dense row-major 64-bit matrix. Row i of a feature matrix is point i.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

inline void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
    if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite value");
}

inline std::string shape_string(Index rows, Index cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace rsf::nn
