#pragma once

#include <array>
#include <string>
#include <vector>

#include "rsf/data/mesh.hpp"

namespace rsf::data {

/// Furniture-like classes assembled from boxes; z is up, objects stand on z = 0.
inline const std::vector<std::string>& synthetic_class_names() {
    static const std::vector<std::string> names{"chair", "table", "bed", "bookshelf", "lamp"};
    return names;
}

namespace detail {

/// Append an axis-aligned box given its min and max corners (12 triangles).
inline void add_box(Mesh& mesh, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    const Index base = mesh.vertices.rows();
    Matrix grown(base + 8, 3);
    if (base > 0) grown.topRows(base) = mesh.vertices;
    for (int corner = 0; corner < 8; ++corner) {
        grown(base + corner, 0) = (corner & 1) ? hi.x() : lo.x();
        grown(base + corner, 1) = (corner & 2) ? hi.y() : lo.y();
        grown(base + corner, 2) = (corner & 4) ? hi.z() : lo.z();
    }
    mesh.vertices = std::move(grown);
    static constexpr std::array<std::array<int, 4>, 6> quads{{
        {0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5},
    }};
    for (const auto& q : quads) {
        mesh.faces.push_back({base + q[0], base + q[1], base + q[2]});
        mesh.faces.push_back({base + q[0], base + q[2], base + q[3]});
    }
}

inline void add_box_centered(Mesh& mesh, const Eigen::Vector3d& center, const Eigen::Vector3d& size) {
    add_box(mesh, center - 0.5 * size, center + 0.5 * size);
}

/// Scale factor uniform in [1 - spread, 1 + spread].
inline double jitter(nn::Rng& rng, double spread = 0.2) { return rng.uniform(1.0 - spread, 1.0 + spread); }

inline void add_legs(Mesh& mesh, double width, double depth, double height, double thickness) {
    for (int sx : {-1, 1}) {
        for (int sy : {-1, 1}) {
            const Eigen::Vector3d c(sx * (width - thickness) / 2, sy * (depth - thickness) / 2, height / 2);
            add_box_centered(mesh, c, Eigen::Vector3d(thickness, thickness, height));
        }
    }
}

}  // namespace detail

inline Mesh make_chair(nn::Rng& rng) {
    Mesh m;
    const double w = 0.5 * detail::jitter(rng), d = 0.5 * detail::jitter(rng);
    const double seat_h = 0.45 * detail::jitter(rng), back_h = 0.5 * detail::jitter(rng, 0.3);
    const double leg = 0.04 * detail::jitter(rng), t = 0.05;
    detail::add_legs(m, w, d, seat_h, leg);
    detail::add_box_centered(m, {0, 0, seat_h + t / 2}, {w, d, t});
    detail::add_box_centered(m, {0, d / 2 - t / 2, seat_h + t + back_h / 2}, {w, t, back_h});
    return m;
}

inline Mesh make_table(nn::Rng& rng) {
    Mesh m;
    const double w = 1.0 * detail::jitter(rng), d = 0.65 * detail::jitter(rng);
    const double h = 0.72 * detail::jitter(rng, 0.1), leg = 0.06 * detail::jitter(rng), t = 0.05;
    detail::add_legs(m, w, d, h, leg);
    detail::add_box_centered(m, {0, 0, h + t / 2}, {w, d, t});
    return m;
}

inline Mesh make_bed(nn::Rng& rng) {
    Mesh m;
    const double w = 1.2 * detail::jitter(rng), l = 2.0 * detail::jitter(rng, 0.1);
    const double leg_h = 0.15 * detail::jitter(rng), mattress = 0.3 * detail::jitter(rng);
    const double head = 0.6 * detail::jitter(rng, 0.3), t = 0.08;
    detail::add_legs(m, w, l, leg_h, 0.08);
    detail::add_box_centered(m, {0, 0, leg_h + mattress / 2}, {w, l, mattress});
    detail::add_box_centered(m, {0, l / 2 + t / 2, (leg_h + mattress + head) / 2}, {w, t, leg_h + mattress + head});
    return m;
}

inline Mesh make_bookshelf(nn::Rng& rng) {
    Mesh m;
    const double w = 0.9 * detail::jitter(rng), d = 0.3 * detail::jitter(rng), h = 1.8 * detail::jitter(rng, 0.15);
    const double t = 0.03;
    detail::add_box_centered(m, {-w / 2 + t / 2, 0, h / 2}, {t, d, h});
    detail::add_box_centered(m, {w / 2 - t / 2, 0, h / 2}, {t, d, h});
    detail::add_box_centered(m, {0, d / 2 - t / 2, h / 2}, {w, t, h});
    const int shelves = 3 + static_cast<int>(rng.below(3));
    for (int s = 0; s <= shelves; ++s) {
        const double z = t / 2 + (h - t) * s / shelves;
        detail::add_box_centered(m, {0, 0, z}, {w - 2 * t, d, t});
    }
    return m;
}

inline Mesh make_lamp(nn::Rng& rng) {
    Mesh m;
    const double base = 0.3 * detail::jitter(rng), pole_h = 1.2 * detail::jitter(rng);
    const double shade_w = 0.4 * detail::jitter(rng), shade_h = 0.3 * detail::jitter(rng);
    detail::add_box_centered(m, {0, 0, 0.025}, {base, base, 0.05});
    detail::add_box_centered(m, {0, 0, 0.05 + pole_h / 2}, {0.03, 0.03, pole_h});
    detail::add_box_centered(m, {0, 0, 0.05 + pole_h + shade_h / 2}, {shade_w, shade_w, shade_h});
    return m;
}

inline Mesh make_synthetic_shape(int label, nn::Rng& rng) {
    switch (label) {
        case 0: return make_chair(rng);
        case 1: return make_table(rng);
        case 2: return make_bed(rng);
        case 3: return make_bookshelf(rng);
        case 4: return make_lamp(rng);
        default: throw InvalidArgument("synthetic shape label must be in 0..4, got " + std::to_string(label));
    }
}

}  // namespace rsf::data
