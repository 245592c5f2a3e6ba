#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/data/cloud_ops.hpp"

namespace rsf::data {

/// Triangle mesh: V x 3 vertices, faces as vertex-index triples.
struct Mesh {
    Matrix vertices;
    std::vector<std::array<std::int64_t, 3>> faces;
};

inline double triangle_area(const Mesh& mesh, const std::array<std::int64_t, 3>& f) {
    const Eigen::Vector3d a = mesh.vertices.row(f[0]).transpose();
    const Eigen::Vector3d b = mesh.vertices.row(f[1]).transpose();
    const Eigen::Vector3d c = mesh.vertices.row(f[2]).transpose();
    return 0.5 * (b - a).cross(c - a).norm();
}

/**
 * @brief Parse an OFF mesh. Polygons with k > 3 vertices are fan-split
 * into k - 2 triangles (v0, vi, vi+1).
 *
 * Accepts the common ModelNet quirk where the counts follow "OFF" on the
 * same line ("OFF490 518 0").
 */
inline Mesh parse_off(std::string_view text) {
    std::vector<std::vector<std::string>> lines;
    {
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            std::istringstream ls(line);
            std::vector<std::string> toks;
            std::string tok;
            while (ls >> tok) toks.push_back(tok);
            if (!toks.empty()) lines.push_back(std::move(toks));
        }
    }
    if (lines.empty() || lines[0][0].rfind("OFF", 0) != 0) throw FormatError("OFF: missing 'OFF' header");

    auto to_int = [](const std::string& s, const char* what) -> long long {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw FormatError(std::string("OFF: bad ") + what + " '" + s + "'");
    };
    auto to_double = [](const std::string& s) -> double {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw FormatError("OFF: bad vertex coordinate '" + s + "'");
    };

    std::vector<std::string> counts = lines[0];
    std::size_t line_no = 1;
    if (counts[0].size() > 3) {
        counts[0] = counts[0].substr(3);
    } else {
        counts.erase(counts.begin());
        if (counts.empty()) {
            if (lines.size() < 2) throw FormatError("OFF: missing element counts");
            counts = lines[line_no++];
        }
    }
    if (counts.size() < 2) throw FormatError("OFF: header needs vertex and face counts");
    const long long n_vertices = to_int(counts[0], "vertex count");
    const long long n_faces = to_int(counts[1], "face count");
    if (n_vertices < 3 || n_faces < 1) throw FormatError("OFF: need at least 3 vertices and 1 face");
    if (lines.size() - line_no < static_cast<std::size_t>(n_vertices + n_faces)) {
        throw FormatError("OFF: file ends before all declared vertices and faces");
    }

    Mesh mesh;
    mesh.vertices.resize(n_vertices, 3);
    for (long long v = 0; v < n_vertices; ++v) {
        const auto& toks = lines[line_no++];
        if (toks.size() < 3) throw FormatError("OFF: vertex " + std::to_string(v) + " has fewer than 3 coordinates");
        for (int k = 0; k < 3; ++k) mesh.vertices(v, k) = to_double(toks[static_cast<std::size_t>(k)]);
    }
    for (long long f = 0; f < n_faces; ++f) {
        const auto& toks = lines[line_no++];
        const long long k = to_int(toks[0], "face size");
        if (k < 3) throw FormatError("OFF: face " + std::to_string(f) + " has fewer than 3 vertices");
        if (static_cast<long long>(toks.size()) < k + 1) throw FormatError("OFF: face " + std::to_string(f) + " is truncated");
        std::vector<std::int64_t> idx;
        for (long long j = 1; j <= k; ++j) {
            const long long i = to_int(toks[static_cast<std::size_t>(j)], "face index");
            if (i < 0 || i >= n_vertices) {
                throw FormatError("OFF: face " + std::to_string(f) + " references vertex " + std::to_string(i) +
                                  " of " + std::to_string(n_vertices));
            }
            idx.push_back(i);
        }
        // Trailing per-face colour values are ignored.
        for (std::size_t j = 1; j + 1 < idx.size(); ++j) mesh.faces.push_back({idx[0], idx[j], idx[j + 1]});
    }
    return mesh;
}

inline std::string write_off(const Mesh& mesh) {
    std::ostringstream out;
    out.precision(17);
    out << "OFF\n" << mesh.vertices.rows() << " " << mesh.faces.size() << " 0\n";
    for (Index v = 0; v < mesh.vertices.rows(); ++v) {
        out << mesh.vertices(v, 0) << " " << mesh.vertices(v, 1) << " " << mesh.vertices(v, 2) << "\n";
    }
    for (const auto& f : mesh.faces) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
    return out.str();
}

struct SurfaceSampling {
    int n_points = 1024;
    bool normalize = true;
};

/**
 * @brief Uniform surface samples: face chosen with probability proportional
 * to its area, point drawn uniformly inside it by reflected barycentric
 * coordinates. Zero-area faces are never selected.
 */
inline PointCloud sample_mesh_surface(const Mesh& mesh, nn::Rng& rng, const SurfaceSampling& opts = {}) {
    if (opts.n_points < 1) throw InvalidArgument("sample_mesh_surface: n_points must be >= 1");
    std::vector<double> cumulative;
    cumulative.reserve(mesh.faces.size());
    double total = 0.0;
    for (const auto& f : mesh.faces) {
        for (auto i : f) {
            if (i < 0 || i >= mesh.vertices.rows()) throw InvalidArgument("sample_mesh_surface: face index out of range");
        }
        total += triangle_area(mesh, f);
        cumulative.push_back(total);
    }
    if (!(total > 0.0)) throw InvalidArgument("sample_mesh_surface: mesh has zero surface area");

    PointCloud cloud;
    cloud.points.resize(opts.n_points, 3);
    for (int k = 0; k < opts.n_points; ++k) {
        const double r = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        if (it == cumulative.end()) {
            // r rounded up to the total: take the last face with positive area.
            it = std::lower_bound(cumulative.begin(), cumulative.end(), total);
        }
        const auto& f = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
        double u = rng.uniform();
        double v = rng.uniform();
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const auto a = mesh.vertices.row(f[0]);
        cloud.points.row(k) = a + u * (mesh.vertices.row(f[1]) - a) + v * (mesh.vertices.row(f[2]) - a);
    }
    if (opts.normalize) cloud.points = normalize_points(cloud.points);
    return cloud;
}

}  // namespace rsf::data
