#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsf/util/binary_io.hpp"
#include "rsf/util/keyvalue.hpp"

namespace rsf::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Fixed-precision text for report cells, so CSVs stay stable across builds.
inline std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

/// RFC 4180 quoting for one CSV cell.
inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<std::string> row) {
        if (row.size() != header_.size()) throw InvalidArgument("CSV row has the wrong number of cells");
        rows_.push_back(std::move(row));
    }

    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    std::string text() const {
        std::string out;
        auto emit = [&out](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_cell(cells[i]);
            out += "\n";
        };
        emit(header_);
        for (const auto& row : rows_) emit(row);
        return out;
    }

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline Json config_json(const util::KeyValueConfig& cfg) {
    Json out = Json::object();
    for (const auto& [section, keys] : cfg.sections()) {
        Json block = Json::object();
        for (const auto& [k, v] : keys) block[k] = v;
        out[section] = block;
    }
    return out;
}

/// JSON report skeleton: command, version, timestamps and the config echo.
class Report {
  public:
    Report(std::string command, const util::KeyValueConfig& effective) {
        doc_["command"] = std::move(command);
        doc_["tool_version"] = kToolVersion;
        doc_["started_at"] = utc_timestamp();
        doc_["config"] = config_json(effective);
    }

    Json& operator[](const std::string& key) { return doc_[key]; }

    void write(const std::filesystem::path& path) {
        doc_["finished_at"] = utc_timestamp();
        util::write_file_atomic(path, doc_.dump(2) + "\n");
    }

  private:
    Json doc_;
};

}  // namespace rsf::cli
