#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/error.hpp"

namespace rsf::data {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Unsigned-byte IDX tensor (the MNIST container).
struct IdxArray {
    std::uint32_t magic = 0;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> values;
};

/// Stack of row-major grayscale images, intensities 0..255.
struct ImageSet {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;

    std::span<const std::uint8_t> image(std::size_t i) const {
        return std::span<const std::uint8_t>(pixels).subspan(i * rows * cols, rows * cols);
    }
};

namespace detail {

inline std::uint32_t read_be32(std::string_view bytes, std::size_t offset) {
    if (offset + 4 > bytes.size()) throw FormatError("IDX: truncated header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

}  // namespace detail

/// Parse an IDX file holding images (0x803, 3 dims) or labels (0x801, 1 dim).
inline IdxArray parse_idx(std::string_view bytes) {
    IdxArray out;
    out.magic = detail::read_be32(bytes, 0);
    std::size_t n_dims = 0;
    if (out.magic == kIdxImagesMagic) {
        n_dims = 3;
    } else if (out.magic == kIdxLabelsMagic) {
        n_dims = 1;
    } else {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "0x%08X", out.magic);
        throw FormatError(std::string("IDX: unsupported magic ") + buf);
    }
    std::size_t total = 1;
    for (std::size_t d = 0; d < n_dims; ++d) {
        out.dims.push_back(detail::read_be32(bytes, 4 + 4 * d));
        total *= out.dims.back();
    }
    const std::size_t offset = 4 + 4 * n_dims;
    if (bytes.size() - offset < total) {
        throw FormatError("IDX: payload truncated, expected " + std::to_string(total) + " bytes, found " +
                          std::to_string(bytes.size() - offset));
    }
    const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + offset);
    out.values.assign(p, p + total);
    return out;
}

inline ImageSet parse_idx_images(std::string_view bytes) {
    IdxArray arr = parse_idx(bytes);
    if (arr.magic != kIdxImagesMagic) throw FormatError("IDX: expected an image file");
    ImageSet images;
    images.count = arr.dims[0];
    images.rows = arr.dims[1];
    images.cols = arr.dims[2];
    images.pixels = std::move(arr.values);
    return images;
}

inline std::vector<std::uint8_t> parse_idx_labels(std::string_view bytes) {
    IdxArray arr = parse_idx(bytes);
    if (arr.magic != kIdxLabelsMagic) throw FormatError("IDX: expected a label file");
    return std::move(arr.values);
}

}  // namespace rsf::data
