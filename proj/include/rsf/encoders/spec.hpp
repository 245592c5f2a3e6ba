#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/nn/init.hpp"
#include "rsf/nn/normalize.hpp"
#include "rsf/util/keyvalue.hpp"

namespace rsf::encoders {

using nn::Index;

inline constexpr Index kEmbeddingDim = 1024;

enum class Family { LinSetNN, LinSet, PointNet, DeepSets };

inline std::string_view to_string(Family family) {
    switch (family) {
        case Family::LinSetNN: return "LinSetNN";
        case Family::LinSet: return "LinSet";
        case Family::PointNet: return "PointNet";
        case Family::DeepSets: return "DeepSets";
    }
    return "PointNet";
}

inline Family parse_family(std::string_view name) {
    if (name == "LinSetNN" || name == "linset-nn" || name == "LinSet-NN") return Family::LinSetNN;
    if (name == "LinSet" || name == "linset") return Family::LinSet;
    if (name == "PointNet" || name == "pointnet") return Family::PointNet;
    if (name == "DeepSets" || name == "deepsets") return Family::DeepSets;
    throw InvalidArgument("unknown encoder family '" + std::string(name) + "'");
}

/// PointNet per-point widths for k MLP blocks; the final width is always 1024.
inline std::vector<Index> pointnet_widths(int n_blocks) {
    switch (n_blocks) {
        case 1: return {1024};
        case 2: return {64, 1024};
        case 3: return {64, 128, 1024};
        case 4: return {64, 64, 128, 1024};
        case 5: return {64, 64, 64, 128, 1024};
        default: throw InvalidArgument("PointNet depth must be in 1..5, got " + std::to_string(n_blocks));
    }
}

/// Architecture of an untrained set encoder plus the seed of its weights.
struct EncoderSpec {
    Family family = Family::PointNet;
    int input_dim = 3;
    std::vector<Index> widths = pointnet_widths(4);
    nn::Normalization norm{nn::NormKind::IN, 1e-5};
    int n_mlp_blocks = 4;
    std::uint64_t seed = 0;
    nn::InitKind init = nn::InitKind::Glorot;

    bool operator==(const EncoderSpec&) const = default;
};

/**
 * Default layout for a family:
 *  - LinSetNN: linear [64, 128, 1024], no normalization
 *  - LinSet:   linear [64, 128, 1024], IN after each layer
 *  - PointNet: depth table above, `norm` as given (IN unless overridden)
 *  - DeepSets: equivariant [256, 512, 1024], no normalization
 */
inline EncoderSpec default_spec(Family family, int input_dim, std::uint64_t seed,
                                nn::NormKind pointnet_norm = nn::NormKind::IN, int n_mlp_blocks = 4) {
    EncoderSpec spec;
    spec.family = family;
    spec.input_dim = input_dim;
    spec.seed = seed;
    switch (family) {
        case Family::LinSetNN:
            spec.widths = {64, 128, 1024};
            spec.norm.kind = nn::NormKind::NN;
            spec.n_mlp_blocks = 3;
            break;
        case Family::LinSet:
            spec.widths = {64, 128, 1024};
            spec.norm.kind = nn::NormKind::IN;
            spec.n_mlp_blocks = 3;
            break;
        case Family::PointNet:
            spec.widths = pointnet_widths(n_mlp_blocks);
            spec.norm.kind = pointnet_norm;
            spec.n_mlp_blocks = n_mlp_blocks;
            break;
        case Family::DeepSets:
            spec.widths = {256, 512, 1024};
            spec.norm.kind = nn::NormKind::NN;
            spec.n_mlp_blocks = 3;
            break;
    }
    return spec;
}

inline void validate(const EncoderSpec& spec) {
    if (spec.input_dim != 2 && spec.input_dim != 3) {
        throw InvalidArgument("encoder input_dim must be 2 or 3, got " + std::to_string(spec.input_dim));
    }
    if (spec.widths.empty() || spec.widths.back() != kEmbeddingDim) {
        throw InvalidArgument("encoder widths must end in 1024");
    }
    for (Index w : spec.widths) {
        if (w < 1) throw InvalidArgument("encoder widths must be positive");
    }
    if (spec.n_mlp_blocks < 1 || spec.n_mlp_blocks > 5) {
        throw InvalidArgument("n_mlp_blocks must be in 1..5, got " + std::to_string(spec.n_mlp_blocks));
    }
    if (spec.family == Family::PointNet && static_cast<int>(spec.widths.size()) != spec.n_mlp_blocks) {
        throw InvalidArgument("PointNet widths list must have n_mlp_blocks entries");
    }
    if (spec.family == Family::LinSetNN && spec.norm.kind != nn::NormKind::NN) {
        throw InvalidArgument("LinSetNN cannot carry a normalization layer");
    }
    if (!(spec.norm.epsilon > 0.0)) throw InvalidArgument("normalization epsilon must be positive");
}

/// Serialize as `key = value` lines under `[encoder]`.
inline void write_spec(const EncoderSpec& spec, util::KeyValueConfig& cfg, const std::string& section = "encoder") {
    std::string widths;
    for (std::size_t i = 0; i < spec.widths.size(); ++i) {
        if (i) widths += ",";
        widths += std::to_string(spec.widths[i]);
    }
    cfg.set(section, "family", std::string(to_string(spec.family)));
    cfg.set(section, "input_dim", std::to_string(spec.input_dim));
    cfg.set(section, "widths", widths);
    cfg.set(section, "norm", std::string(nn::to_string(spec.norm.kind)));
    cfg.set(section, "epsilon", util::format_double(spec.norm.epsilon));
    cfg.set(section, "n_mlp_blocks", std::to_string(spec.n_mlp_blocks));
    cfg.set(section, "seed", std::to_string(spec.seed));
    cfg.set(section, "init", std::string(nn::to_string(spec.init)));
}

inline std::string spec_to_text(const EncoderSpec& spec) {
    util::KeyValueConfig cfg;
    write_spec(spec, cfg);
    return cfg.to_text();
}

/**
 * Read an encoder block. Missing keys fall back to the family defaults, so
 * `family = PointNet` plus `norm = NN` is a complete description.
 */
inline EncoderSpec read_spec(const util::KeyValueConfig& cfg, const std::string& section = "encoder") {
    const Family family = parse_family(cfg.get_string(section, "family", "PointNet"));
    const int input_dim = cfg.get_number<int>(section, "input_dim", 3);
    const auto seed = cfg.get_number<std::uint64_t>(section, "seed", 0);
    const int default_blocks = family == Family::PointNet ? 4 : 3;
    const int blocks = cfg.get_number<int>(section, "n_mlp_blocks", default_blocks);
    EncoderSpec spec = default_spec(family, input_dim, seed, nn::NormKind::IN,
                                    family == Family::PointNet ? std::clamp(blocks, 1, 5) : 4);
    spec.n_mlp_blocks = blocks;
    if (auto norm = cfg.get(section, "norm")) spec.norm.kind = nn::parse_norm_kind(*norm);
    spec.norm.epsilon = cfg.get_number<double>(section, "epsilon", spec.norm.epsilon);
    if (auto init = cfg.get(section, "init")) spec.init = nn::parse_init_kind(*init);
    if (auto widths = cfg.get(section, "widths")) {
        spec.widths.clear();
        for (const auto& w : util::split(*widths, ',')) spec.widths.push_back(util::parse_number<Index>(w, section + ".widths"));
    }
    validate(spec);
    return spec;
}

inline EncoderSpec spec_from_text(std::string_view text) { return read_spec(util::KeyValueConfig::parse(text)); }

/// Short label such as "PointNet-IN-4".
inline std::string spec_label(const EncoderSpec& spec) {
    std::string label = std::string(to_string(spec.family)) + "-" + std::string(nn::to_string(spec.norm.kind));
    if (spec.family == Family::PointNet) label += "-" + std::to_string(spec.n_mlp_blocks);
    return label;
}

}  // namespace rsf::encoders
