#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "rsf/nn/matrix.hpp"
#include "rsf/nn/rng.hpp"

namespace rsf::nn {

/// Weight initialization schemes. Glorot is the default everywhere.
enum class InitKind {
    Glorot,   ///< U[-a, a], a = sqrt(6 / (fan_in + fan_out))
    He,       ///< U[-a, a], a = sqrt(6 / fan_in)
    Uniform,  ///< U[-a, a], a = 1 / sqrt(fan_in)
    Normal,   ///< N(0, 1 / fan_in)
};

inline std::string_view to_string(InitKind kind) {
    switch (kind) {
        case InitKind::Glorot: return "glorot";
        case InitKind::He: return "he";
        case InitKind::Uniform: return "uniform";
        case InitKind::Normal: return "normal";
    }
    return "glorot";
}

inline InitKind parse_init_kind(std::string_view name) {
    if (name == "glorot") return InitKind::Glorot;
    if (name == "he") return InitKind::He;
    if (name == "uniform") return InitKind::Uniform;
    if (name == "normal") return InitKind::Normal;
    throw InvalidArgument("unknown init kind '" + std::string(name) + "'");
}

inline double glorot_bound(Index fan_in, Index fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// fan_in x fan_out matrix, entries uniform on [-a, a], a = sqrt(6/(fan_in+fan_out)).
inline Matrix glorot_init(Index fan_in, Index fan_out, Rng& rng) {
    if (fan_in < 1 || fan_out < 1) {
        throw InvalidArgument("glorot_init: fan values must be >= 1, got " +
                              shape_string(fan_in, fan_out));
    }
    const double a = glorot_bound(fan_in, fan_out);
    Matrix w(fan_in, fan_out);
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-a, a);
    return w;
}

inline Matrix init_weights(InitKind kind, Index fan_in, Index fan_out, Rng& rng) {
    if (kind == InitKind::Glorot) return glorot_init(fan_in, fan_out, rng);
    if (fan_in < 1 || fan_out < 1) {
        throw InvalidArgument("init_weights: fan values must be >= 1, got " +
                              shape_string(fan_in, fan_out));
    }
    Matrix w(fan_in, fan_out);
    const double fi = static_cast<double>(fan_in);
    for (Index i = 0; i < w.size(); ++i) {
        switch (kind) {
            case InitKind::He: w.data()[i] = rng.uniform(-std::sqrt(6.0 / fi), std::sqrt(6.0 / fi)); break;
            case InitKind::Uniform: w.data()[i] = rng.uniform(-1.0 / std::sqrt(fi), 1.0 / std::sqrt(fi)); break;
            case InitKind::Normal: w.data()[i] = rng.normal(0.0, 1.0 / std::sqrt(fi)); break;
            case InitKind::Glorot: break;
        }
    }
    return w;
}

}  // namespace rsf::nn
