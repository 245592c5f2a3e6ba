#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rsf/data/point_cloud.hpp"
#include "rsf/util/binary_io.hpp"

namespace rsf::data {

struct SourceChecksum {
    std::string name;
    std::uint32_t crc32 = 0;

    bool operator==(const SourceChecksum&) const = default;
};

struct DatasetManifest {
    std::string name;
    std::string split;
    std::vector<std::string> class_names;
    std::uint64_t item_count = 0;
    std::uint32_t points_per_cloud = 0;
    std::uint32_t dim = 0;
    std::uint64_t creation_seed = 0;
    bool rotated = false;
    std::vector<SourceChecksum> sources;

    bool operator==(const DatasetManifest&) const = default;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<PointCloud> clouds;
};

inline constexpr char kCacheMagic[8] = {'R', 'S', 'F', 'D', 'S', 'E', 'T', '\0'};
inline constexpr std::uint8_t kCacheVersion = 1;
inline constexpr std::size_t kCacheIdWidth = 64;

/// Manifest consistency: counts match, labels dense in [0, #classes), fixed cloud shape.
inline void validate_dataset(const DatasetManifest& manifest, std::span<const PointCloud> clouds) {
    if (manifest.item_count != clouds.size()) {
        throw InvalidArgument("manifest lists " + std::to_string(manifest.item_count) + " items but " +
                              std::to_string(clouds.size()) + " clouds were given");
    }
    for (const auto& cloud : clouds) {
        if (cloud.points.rows() != static_cast<Index>(manifest.points_per_cloud) ||
            cloud.points.cols() != static_cast<Index>(manifest.dim)) {
            throw InvalidArgument("cloud '" + cloud.id + "' does not match the manifest's fixed shape");
        }
        if (cloud.label < 0 || cloud.label >= static_cast<int>(manifest.class_names.size())) {
            throw InvalidArgument("cloud '" + cloud.id + "' has label outside the class list");
        }
        if (cloud.id.size() > kCacheIdWidth) throw InvalidArgument("cloud id longer than 64 bytes: '" + cloud.id + "'");
    }
}

/**
 * Layout: magic[8], version u8, manifest, then item_count fixed-width records
 * (label i32, id padded to 64 bytes, points row-major f64), then CRC-32 of
 * everything before it.
 */
inline std::string serialize_dataset(const DatasetManifest& manifest, std::span<const PointCloud> clouds) {
    validate_dataset(manifest, clouds);
    util::ByteWriter w;
    w.put_bytes(std::string_view(kCacheMagic, 8));
    w.put<std::uint8_t>(kCacheVersion);
    w.put_string(manifest.name);
    w.put_string(manifest.split);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(manifest.class_names.size()));
    for (const auto& c : manifest.class_names) w.put_string(c);
    w.put<std::uint64_t>(manifest.item_count);
    w.put<std::uint32_t>(manifest.points_per_cloud);
    w.put<std::uint32_t>(manifest.dim);
    w.put<std::uint64_t>(manifest.creation_seed);
    w.put<std::uint8_t>(manifest.rotated ? 1 : 0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(manifest.sources.size()));
    for (const auto& s : manifest.sources) {
        w.put_string(s.name);
        w.put<std::uint32_t>(s.crc32);
    }
    const std::string zeros(kCacheIdWidth, '\0');
    for (const auto& cloud : clouds) {
        w.put<std::int32_t>(cloud.label);
        w.put_bytes(cloud.id);
        w.put_bytes(std::string_view(zeros).substr(0, kCacheIdWidth - cloud.id.size()));
        w.put_doubles(std::span<const double>(cloud.points.data(), static_cast<std::size_t>(cloud.points.size())));
    }
    w.seal();
    return w.bytes();
}

inline Dataset deserialize_dataset(std::string_view bytes) {
    if (bytes.size() < 9 || bytes.substr(0, 8) != std::string_view(kCacheMagic, 8)) {
        throw FormatError("not a dataset cache (bad magic)");
    }
    if (const auto version = static_cast<std::uint8_t>(bytes[8]); version != kCacheVersion) {
        throw VersionError("dataset cache version " + std::to_string(version) + ", expected " +
                           std::to_string(kCacheVersion));
    }
    util::ByteReader r(util::verify_sealed(bytes).substr(9));
    Dataset ds;
    DatasetManifest& m = ds.manifest;
    m.name = r.get_string();
    m.split = r.get_string();
    const auto n_classes = r.get<std::uint32_t>();
    for (std::uint32_t c = 0; c < n_classes; ++c) m.class_names.push_back(r.get_string());
    m.item_count = r.get<std::uint64_t>();
    m.points_per_cloud = r.get<std::uint32_t>();
    m.dim = r.get<std::uint32_t>();
    m.creation_seed = r.get<std::uint64_t>();
    m.rotated = r.get<std::uint8_t>() != 0;
    const auto n_sources = r.get<std::uint32_t>();
    for (std::uint32_t s = 0; s < n_sources; ++s) {
        SourceChecksum src;
        src.name = r.get_string();
        src.crc32 = r.get<std::uint32_t>();
        m.sources.push_back(std::move(src));
    }
    const std::size_t record = 4 + kCacheIdWidth + 8ull * m.points_per_cloud * m.dim;
    if (m.item_count > 0 && r.remaining() / record < m.item_count) throw FormatError("dataset cache has fewer records than its manifest");
    ds.clouds.reserve(static_cast<std::size_t>(m.item_count));
    for (std::uint64_t i = 0; i < m.item_count; ++i) {
        PointCloud cloud;
        cloud.label = r.get<std::int32_t>();
        const auto raw_id = r.get_bytes(kCacheIdWidth);
        cloud.id = std::string(raw_id.substr(0, raw_id.find('\0')));
        cloud.points.resize(m.points_per_cloud, m.dim);
        r.get_doubles(std::span<double>(cloud.points.data(), static_cast<std::size_t>(cloud.points.size())));
        ds.clouds.push_back(std::move(cloud));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in dataset cache");
    validate_dataset(ds.manifest, ds.clouds);
    return ds;
}

inline void write_cache(const DatasetManifest& manifest, std::span<const PointCloud> clouds,
                        const std::filesystem::path& path) {
    util::write_file_atomic(path, serialize_dataset(manifest, clouds));
}

inline Dataset read_cache(const std::filesystem::path& path) { return deserialize_dataset(util::read_file(path)); }

}  // namespace rsf::data
