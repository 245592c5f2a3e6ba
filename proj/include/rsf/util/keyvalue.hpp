#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rsf/error.hpp"

namespace rsf::util {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw InvalidArgument(std::string(what) + ": cannot parse '" + std::string(text) + "'");
    }
    return value;
}

inline bool parse_bool(std::string_view text, std::string_view what) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw InvalidArgument(std::string(what) + ": expected a boolean, got '" + std::string(text) + "'");
}

/// Shortest decimal text that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/**
 * @brief Plain-text `key = value` configuration with `[section]` headers.
 *
 * Keys before the first header belong to the empty section. `#` and `;`
 * start comment lines. Later assignments overwrite earlier ones.
 */
class KeyValueConfig {
  public:
    static KeyValueConfig parse(std::string_view text) {
        KeyValueConfig cfg;
        std::string section;
        std::istringstream in{std::string(text)};
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#' || line[0] == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw InvalidArgument("config line " + std::to_string(line_no) + ": unterminated section header");
                section = trim(std::string_view(line).substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw InvalidArgument("config line " + std::to_string(line_no) + ": expected 'key = value'");
            }
            const std::string key = trim(std::string_view(line).substr(0, eq));
            if (key.empty()) throw InvalidArgument("config line " + std::to_string(line_no) + ": empty key");
            cfg.set(section, key, trim(std::string_view(line).substr(eq + 1)));
        }
        return cfg;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    void set(const std::string& section, const std::string& key, std::string value) {
        sections_[section][key] = std::move(value);
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return std::nullopt;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    }

    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
        return get(section, key).value_or(fallback);
    }

    template <typename T>
    T get_number(const std::string& section, const std::string& key, T fallback) const {
        const auto v = get(section, key);
        return v ? parse_number<T>(*v, section + "." + key) : fallback;
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        const auto v = get(section, key);
        return v ? parse_bool(*v, section + "." + key) : fallback;
    }

    const std::map<std::string, std::string>& section(const std::string& name) const {
        static const std::map<std::string, std::string> empty;
        const auto s = sections_.find(name);
        return s == sections_.end() ? empty : s->second;
    }

    /// Overlay every key of `other` onto this config.
    void merge(const KeyValueConfig& other) {
        for (const auto& [name, keys] : other.sections_) {
            for (const auto& [k, v] : keys) set(name, k, v);
        }
    }

    std::string to_text() const {
        std::string out;
        for (const auto& [name, keys] : sections_) {
            if (!name.empty()) out += "[" + name + "]\n";
            for (const auto& [k, v] : keys) out += k + " = " + v + "\n";
        }
        return out;
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const { return sections_; }

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace rsf::util
