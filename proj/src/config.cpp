#include "msgat/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "msgat/errors.hpp"

namespace msgat {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

}  // namespace

KvConfig KvConfig::parse_text(const std::string& text, const std::string& origin) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = unquote(trim(t.substr(eq + 1)));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        cfg.set(section.empty() ? key : section + "." + key, val);
    }
    return cfg;
}

KvConfig KvConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

bool KvConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long KvConfig::get_int(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        size_t pos = 0;
        long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "': expected integer, got '" + it->second + "'");
    }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "': expected number, got '" + it->second + "'");
    }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<double> KvConfig::get_doubles(const std::string& key) const {
    std::vector<double> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::istringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(trim(item)));
        } catch (...) {
            throw ConfigError("config key '" + key + "': expected comma-separated numbers");
        }
    }
    return out;
}

std::vector<long> KvConfig::get_ints(const std::string& key) const {
    std::vector<long> out;
    for (double d : get_doubles(key)) out.push_back(static_cast<long>(d));
    return out;
}

void KvConfig::set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = value;
}

void KvConfig::set_int(const std::string& key, long v) { set(key, std::to_string(v)); }

void KvConfig::set_double(const std::string& key, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    set(key, buf);
}

void KvConfig::require_known(const std::vector<std::string>& known_keys) const {
    for (const auto& [key, _] : values_) {
        if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end())
            throw ConfigError("unknown config key '" + key + "'");
    }
}

std::string KvConfig::text() const {
    // group by section, keep first-seen section order and in-section key order
    std::vector<std::string> sections;
    auto section_of = [](const std::string& key) {
        auto dot = key.find('.');
        return dot == std::string::npos ? std::string() : key.substr(0, dot);
    };
    for (const std::string& key : order_) {
        std::string s = section_of(key);
        if (std::find(sections.begin(), sections.end(), s) == sections.end()) sections.push_back(s);
    }
    std::string out;
    for (const std::string& s : sections) {
        if (!s.empty()) out += "[" + s + "]\n";
        for (const std::string& key : order_) {
            if (section_of(key) != s) continue;
            std::string local = s.empty() ? key : key.substr(s.size() + 1);
            out += local + " = " + values_.at(key) + "\n";
        }
    }
    return out;
}

}  // namespace msgat
