#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rsf/encoders/encoder.hpp"
#include "rsf/util/binary_io.hpp"

namespace rsf::encoders {

/// Where an embedding matrix came from.
struct Provenance {
    std::string encoder_spec;  ///< spec_to_text() of the encoder
    std::uint64_t encoder_seed = 0;
    std::string dataset;
    std::string split;
    std::uint64_t batch_size = 1;
    std::uint64_t order_seed = 0;

    bool operator==(const Provenance&) const = default;
};

/// N x 1024 embeddings with labels, item ids and provenance.
struct EmbeddingMatrix {
    Matrix data;
    std::vector<int> labels;
    std::vector<std::string> ids;
    std::vector<std::string> class_names;
    Provenance provenance;

    Index size() const { return data.rows(); }
    int n_classes() const { return static_cast<int>(class_names.size()); }

    bool operator==(const EmbeddingMatrix&) const = default;
};

/**
 * @brief Embed a whole dataset.
 *
 * Non-BN encoders embed cloud by cloud, so the result ignores batch_size.
 * BN encoders shuffle the items with `order_seed`, cut batches of
 * batch_size (a trailing single cloud joins the previous batch so BN
 * statistics stay defined) and scatter the rows back into dataset order.
 */
inline EmbeddingMatrix embed_dataset(const EncoderParams& params, std::span<const data::PointCloud> clouds,
                                     std::size_t batch_size, std::uint64_t order_seed) {
    const bool batch_norm = params.spec().norm.kind == nn::NormKind::BN;
    if (batch_size < 1) throw InvalidArgument("embed_dataset: batch_size must be >= 1");
    if (batch_norm && batch_size < 2) throw InvalidArgument("embed_dataset: BN encoders need batch_size >= 2");
    if (clouds.empty()) throw EmptySetError("embed_dataset: empty dataset");
    if (batch_norm && clouds.size() < 2) throw DegenerateStatistics("embed_dataset: BN needs at least 2 clouds");

    EmbeddingMatrix out;
    out.data.resize(static_cast<Index>(clouds.size()), params.output_dim());
    out.labels.reserve(clouds.size());
    out.ids.reserve(clouds.size());
    for (const auto& cloud : clouds) {
        out.labels.push_back(cloud.label);
        out.ids.push_back(cloud.id);
    }
    out.provenance.encoder_spec = spec_to_text(params.spec());
    out.provenance.encoder_seed = params.spec().seed;
    out.provenance.batch_size = batch_size;
    out.provenance.order_seed = order_seed;

    if (!batch_norm) {
        for (std::size_t i = 0; i < clouds.size(); ++i) out.data.row(static_cast<Index>(i)) = embed_one(params, clouds[i]);
        return out;
    }

    nn::Rng rng(order_seed);
    const std::vector<std::size_t> order = nn::permutation(clouds.size(), rng);
    std::size_t start = 0;
    std::vector<data::PointCloud> batch;
    while (start < order.size()) {
        std::size_t end = std::min(start + batch_size, order.size());
        if (order.size() - end == 1) ++end;
        batch.clear();
        for (std::size_t k = start; k < end; ++k) batch.push_back(clouds[order[k]]);
        const Matrix rows = embed(params, batch);
        for (std::size_t k = start; k < end; ++k) out.data.row(static_cast<Index>(order[k])) = rows.row(static_cast<Index>(k - start));
        start = end;
    }
    return out;
}

inline constexpr char kEmbeddingMagic[8] = {'R', 'S', 'F', 'E', 'M', 'B', '\0', '\0'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

inline std::string serialize_embeddings(const EmbeddingMatrix& emb) {
    util::ByteWriter w;
    w.put_bytes(std::string_view(kEmbeddingMagic, 8));
    w.put<std::uint32_t>(kEmbeddingVersion);
    w.put_string(emb.provenance.encoder_spec);
    w.put<std::uint64_t>(emb.provenance.encoder_seed);
    w.put_string(emb.provenance.dataset);
    w.put_string(emb.provenance.split);
    w.put<std::uint64_t>(emb.provenance.batch_size);
    w.put<std::uint64_t>(emb.provenance.order_seed);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(emb.class_names.size()));
    for (const auto& name : emb.class_names) w.put_string(name);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(emb.data.rows()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(emb.data.cols()));
    for (Index i = 0; i < emb.data.rows(); ++i) {
        w.put<std::int32_t>(emb.labels[static_cast<std::size_t>(i)]);
        w.put_string(emb.ids[static_cast<std::size_t>(i)]);
    }
    w.put_doubles(std::span<const double>(emb.data.data(), static_cast<std::size_t>(emb.data.size())));
    w.seal();
    return w.bytes();
}

inline EmbeddingMatrix deserialize_embeddings(std::string_view bytes) {
    if (bytes.size() < 12 || bytes.substr(0, 8) != std::string_view(kEmbeddingMagic, 8)) {
        throw FormatError("not an embedding file (bad magic)");
    }
    util::ByteReader header(bytes.substr(8, 4));
    if (const auto version = header.get<std::uint32_t>(); version != kEmbeddingVersion) {
        throw VersionError("embedding file version " + std::to_string(version) + ", expected " +
                           std::to_string(kEmbeddingVersion));
    }
    util::ByteReader r(util::verify_sealed(bytes).substr(12));
    EmbeddingMatrix emb;
    emb.provenance.encoder_spec = r.get_string();
    emb.provenance.encoder_seed = r.get<std::uint64_t>();
    emb.provenance.dataset = r.get_string();
    emb.provenance.split = r.get_string();
    emb.provenance.batch_size = r.get<std::uint64_t>();
    emb.provenance.order_seed = r.get<std::uint64_t>();
    const auto n_classes = r.get<std::uint32_t>();
    for (std::uint32_t c = 0; c < n_classes; ++c) emb.class_names.push_back(r.get_string());
    const auto rows = static_cast<Index>(r.get<std::uint64_t>());
    const auto cols = static_cast<Index>(r.get<std::uint64_t>());
    if (rows < 0 || cols < 0 || static_cast<double>(rows) * static_cast<double>(cols) * 8.0 > static_cast<double>(bytes.size())) {
        throw FormatError("embedding file declares an impossible shape");
    }
    for (Index i = 0; i < rows; ++i) {
        emb.labels.push_back(r.get<std::int32_t>());
        emb.ids.push_back(r.get_string());
    }
    emb.data.resize(rows, cols);
    r.get_doubles(std::span<double>(emb.data.data(), static_cast<std::size_t>(emb.data.size())));
    if (r.remaining() != 0) throw FormatError("trailing bytes in embedding file");
    return emb;
}

inline void write_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& path) {
    util::write_file_atomic(path, serialize_embeddings(emb));
}

inline EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
    return deserialize_embeddings(util::read_file(path));
}

inline constexpr char kParamsMagic[8] = {'R', 'S', 'F', 'P', 'A', 'R', 'M', '\0'};
inline constexpr std::uint32_t kParamsVersion = 1;

/// Binary dump: magic, version, spec text, then each layer's W, b, V row-major.
inline std::string serialize_params(const EncoderParams& params) {
    util::ByteWriter w;
    w.put_bytes(std::string_view(kParamsMagic, 8));
    w.put<std::uint32_t>(kParamsVersion);
    w.put_string(spec_to_text(params.spec()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(params.layers().size()));
    auto put_matrix = [&w](const auto& m) {
        w.put<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
        w.put<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
        w.put_doubles(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
    };
    for (const Layer& layer : params.layers()) {
        put_matrix(layer.weight);
        put_matrix(layer.bias);
        put_matrix(layer.context);
    }
    w.seal();
    return w.bytes();
}

inline EncoderParams deserialize_params(std::string_view bytes) {
    if (bytes.size() < 12 || bytes.substr(0, 8) != std::string_view(kParamsMagic, 8)) {
        throw FormatError("not an encoder parameter file (bad magic)");
    }
    util::ByteReader header(bytes.substr(8, 4));
    if (const auto version = header.get<std::uint32_t>(); version != kParamsVersion) {
        throw VersionError("encoder parameter file version " + std::to_string(version));
    }
    util::ByteReader r(util::verify_sealed(bytes).substr(12));
    EncoderSpec spec = spec_from_text(r.get_string());
    const auto n_layers = r.get<std::uint32_t>();
    auto get_matrix = [&r](auto& m) {
        const auto rows = static_cast<Index>(r.get<std::uint64_t>());
        const auto cols = static_cast<Index>(r.get<std::uint64_t>());
        if (static_cast<double>(rows) * static_cast<double>(cols) * 8.0 > static_cast<double>(r.remaining())) {
            throw FormatError("encoder parameter file declares an impossible shape");
        }
        m.resize(rows, cols);
        r.get_doubles(std::span<double>(m.data(), static_cast<std::size_t>(m.size())));
    };
    std::vector<Layer> layers(n_layers);
    for (Layer& layer : layers) {
        get_matrix(layer.weight);
        get_matrix(layer.bias);
        get_matrix(layer.context);
    }
    return EncoderParams::from_layers(std::move(spec), std::move(layers));
}

}  // namespace rsf::encoders
