#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rsf/data/cache.hpp"
#include "rsf/data/cloud_ops.hpp"
#include "rsf/data/mesh.hpp"
#include "rsf/data/mnist.hpp"
#include "rsf/data/synthetic_shapes.hpp"

namespace rsf::data {

inline std::string item_id(const std::string& dataset, const std::string& split, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06zu", index);
    return dataset + "-" + split + "-" + buf;
}

/**
 * @brief MNIST-PC from raw IDX bytes. Item i is sampled with the substream
 * derive_seed(seed, i), so the result depends only on (bytes, seed, limit).
 * `limit` = 0 keeps every image.
 */
inline Dataset build_mnist_pc(std::string_view image_bytes, std::string_view label_bytes, const std::string& split,
                              std::size_t limit, std::uint64_t seed, const MnistSampling& sampling = {}) {
    const ImageSet images = parse_idx_images(image_bytes);
    const std::vector<std::uint8_t> labels = parse_idx_labels(label_bytes);
    if (labels.size() != images.count) {
        throw FormatError("MNIST: " + std::to_string(images.count) + " images but " + std::to_string(labels.size()) + " labels");
    }
    const std::size_t n = limit == 0 ? images.count : std::min(limit, images.count);
    Dataset ds;
    ds.manifest.name = "mnist-pc";
    ds.manifest.split = split;
    for (int c = 0; c < 10; ++c) ds.manifest.class_names.push_back(std::to_string(c));
    ds.manifest.item_count = n;
    ds.manifest.points_per_cloud = static_cast<std::uint32_t>(sampling.n_points);
    ds.manifest.dim = 2;
    ds.manifest.creation_seed = seed;
    ds.manifest.sources = {{"images", util::crc32_of(image_bytes)}, {"labels", util::crc32_of(label_bytes)}};
    ds.clouds.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] > 9) throw FormatError("MNIST: label " + std::to_string(labels[i]) + " out of range");
        nn::Rng rng(nn::derive_seed(seed, i));
        PointCloud cloud = mnist_to_pointcloud(images.image(i), images.rows, images.cols, rng, sampling);
        cloud.label = labels[i];
        cloud.id = item_id("mnist", split, i);
        ds.clouds.push_back(std::move(cloud));
    }
    return ds;
}

/**
 * @brief Synthetic furniture set: `per_class` meshes of each of the 5
 * classes, interleaved by class. The train and test splits draw from
 * disjoint substreams of `seed`.
 */
inline Dataset build_synthetic_shapes(std::size_t per_class, const std::string& split, int n_points, std::uint64_t seed,
                                      const std::vector<int>& classes = {0, 1, 2, 3, 4}) {
    Dataset ds;
    ds.manifest.name = "synthetic-shapes";
    ds.manifest.split = split;
    for (int c : classes) ds.manifest.class_names.push_back(synthetic_class_names().at(static_cast<std::size_t>(c)));
    ds.manifest.item_count = per_class * classes.size();
    ds.manifest.points_per_cloud = static_cast<std::uint32_t>(n_points);
    ds.manifest.dim = 3;
    ds.manifest.creation_seed = seed;
    const std::uint64_t split_seed = nn::derive_seed(seed, split == "train" ? 0 : split == "test" ? 1 : 2);
    for (std::size_t i = 0; i < ds.manifest.item_count; ++i) {
        const std::size_t class_slot = i % classes.size();
        nn::Rng rng(nn::derive_seed(split_seed, i));
        const Mesh mesh = make_synthetic_shape(classes[class_slot], rng);
        PointCloud cloud = sample_mesh_surface(mesh, rng, {n_points, true});
        cloud.label = static_cast<int>(class_slot);
        cloud.id = item_id("synth", split, i);
        ds.clouds.push_back(std::move(cloud));
    }
    return ds;
}

/**
 * @brief ModelNet-style tree: root/<class>/<split>/<name>.off. Classes are the
 * sorted subdirectory names; files are visited in sorted order.
 */
inline Dataset build_mesh_dataset(const std::filesystem::path& root, const std::string& name, const std::string& split,
                                  int n_points, std::uint64_t seed, std::size_t per_class_limit = 0) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw InvalidArgument("mesh dataset root '" + root.string() + "' is not a directory");
    std::vector<std::string> classes;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) classes.push_back(entry.path().filename().string());
    }
    std::sort(classes.begin(), classes.end());
    Dataset ds;
    ds.manifest.name = name;
    ds.manifest.split = split;
    ds.manifest.class_names = classes;
    ds.manifest.points_per_cloud = static_cast<std::uint32_t>(n_points);
    ds.manifest.dim = 3;
    ds.manifest.creation_seed = seed;
    std::uint32_t combined = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const fs::path dir = root / classes[c] / split;
        if (!fs::is_directory(dir)) continue;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".off") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (per_class_limit > 0 && files.size() > per_class_limit) files.resize(per_class_limit);
        for (const auto& file : files) {
            const std::string text = util::read_file(file);
            combined ^= util::crc32_of(text);
            const Mesh mesh = parse_off(text);
            nn::Rng rng(nn::derive_seed(seed, ds.clouds.size()));
            PointCloud cloud = sample_mesh_surface(mesh, rng, {n_points, true});
            cloud.label = static_cast<int>(c);
            cloud.id = (classes[c] + "/" + file.stem().string()).substr(0, kCacheIdWidth);
            ds.clouds.push_back(std::move(cloud));
        }
    }
    ds.manifest.item_count = ds.clouds.size();
    ds.manifest.sources = {{"off-files-xor", combined}};
    if (ds.clouds.empty()) throw InvalidArgument("no .off files found under '" + root.string() + "' for split " + split);
    return ds;
}

/// One independent uniform rotation per item, item i using derive_seed(seed, i).
inline Dataset rotate_dataset(Dataset ds, std::uint64_t seed) {
    if (ds.manifest.dim != 3) throw InvalidArgument("rotation requires a 3-D dataset");
    for (std::size_t i = 0; i < ds.clouds.size(); ++i) {
        nn::Rng rng(nn::derive_seed(seed, i));
        ds.clouds[i] = rotate_cloud(std::move(ds.clouds[i]), random_rotation(rng));
    }
    ds.manifest.rotated = true;
    return ds;
}

}  // namespace rsf::data
