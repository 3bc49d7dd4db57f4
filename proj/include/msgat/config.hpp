#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace msgat {

// key = value text with [section] headers and '#' comments. Keys are stored as
// "section.key"; keys before any header live in the "" section.
class KvConfig {
public:
    static KvConfig parse_file(const std::string& path);
    static KvConfig parse_text(const std::string& text, const std::string& origin = "<text>");

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    long get_int(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;  // comma-separated
    std::vector<long> get_ints(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    void set_int(const std::string& key, long v);
    void set_double(const std::string& key, double v);

    // Unknown keys are configuration errors, not warnings.
    void require_known(const std::vector<std::string>& known_keys) const;

    std::string text() const;  // deterministic section-grouped rendering

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;  // insertion order of keys
};

inline constexpr const char* kArtifactVersion = "1.0.0";

}  // namespace msgat
