#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "rsf/nn/matrix.hpp"
#include "rsf/nn/rng.hpp"

namespace rsf::test {

inline nn::Matrix random_matrix(nn::Index rows, nn::Index cols, nn::Rng& rng, double scale = 1.0) {
    nn::Matrix m(rows, cols);
    for (nn::Index k = 0; k < m.size(); ++k) m.data()[k] = scale * rng.normal();
    return m;
}

/// |a - b| / max(|a|, |b|, floor), the comparison used by gradient checks.
inline double rel_error(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Fresh scratch directory under the system temp path, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() / ("rsf-test-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

}  // namespace rsf::test
