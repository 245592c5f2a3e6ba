#pragma once

#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rsf/error.hpp"
#include "rsf/nn/matrix.hpp"
#include "rsf/util/keyvalue.hpp"

namespace rsf::analysis {

/// CSV with header id,x,y,true_label,cluster_label; one row per point.
/// Coordinates use shortest round-trip formatting.
inline std::string scatter_csv(std::span<const std::string> ids, const nn::Matrix& coords, std::span<const int> true_labels,
                               std::span<const int> cluster_labels) {
    const auto n = static_cast<std::size_t>(coords.rows());
    if (coords.cols() != 2 || ids.size() != n || true_labels.size() != n || cluster_labels.size() != n) {
        throw InvalidArgument("scatter_csv: inconsistent row counts or coordinates not 2-D");
    }
    std::ostringstream out;
    out << "id,x,y,true_label,cluster_label\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<nn::Index>(i);
        out << ids[i] << ',' << util::format_double(coords(r, 0)) << ',' << util::format_double(coords(r, 1)) << ','
            << true_labels[i] << ',' << cluster_labels[i] << '\n';
    }
    return out.str();
}

}  // namespace rsf::analysis
