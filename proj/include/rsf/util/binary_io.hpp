#pragma once

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "rsf/error.hpp"

namespace rsf::util {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

inline std::uint32_t crc32_of(std::string_view bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    std::size_t done = 0;
    while (done < bytes.size()) {
        const std::size_t chunk = std::min<std::size_t>(bytes.size() - done, 1u << 30);
        crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + done), static_cast<uInt>(chunk));
        done += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

/// Append-only little-endian byte buffer.
class ByteWriter {
  public:
    template <typename T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        char raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        buf_.append(raw, sizeof(T));
    }

    void put_bytes(std::string_view bytes) { buf_.append(bytes); }

    void put_string(std::string_view s) {
        put<std::uint64_t>(s.size());
        buf_.append(s);
    }

    void put_doubles(std::span<const double> values) {
        buf_.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
    }

    /// Append the CRC-32 of everything written so far.
    void seal() { put<std::uint32_t>(crc32_of(buf_)); }

    const std::string& bytes() const { return buf_; }

  private:
    std::string buf_;
};

/// Bounds-checked reader over a byte buffer; overruns raise FormatError.
class ByteReader {
  public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string_view get_bytes(std::size_t n) {
        need(n);
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    std::string get_string() {
        const auto n = get<std::uint64_t>();
        return std::string(get_bytes(static_cast<std::size_t>(n)));
    }

    void get_doubles(std::span<double> out) {
        need(out.size_bytes());
        std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
        pos_ += out.size_bytes();
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

  private:
    void need(std::size_t n) const {
        if (n > bytes_.size() - pos_) throw FormatError("unexpected end of data");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

/// Verify and strip the trailing CRC-32 written by ByteWriter::seal().
inline std::string_view verify_sealed(std::string_view bytes) {
    if (bytes.size() < 4) throw ChecksumError("file too short to carry a checksum");
    const auto body = bytes.substr(0, bytes.size() - 4);
    std::uint32_t stored;
    std::memcpy(&stored, bytes.data() + body.size(), 4);
    if (stored != crc32_of(body)) throw ChecksumError("checksum mismatch (file truncated or corrupted)");
    return body;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

/// Write to a sibling temp file and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw InvalidArgument("short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace rsf::util
