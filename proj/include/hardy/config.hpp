#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/grid.hpp"
#include "hardy/moments.hpp"

namespace hardy {

/**
 * Plain-text configuration: `[section]` headers and `key = value` lines.
 * `#` starts a comment. Every entry remembers its line so that
 * diagnostics can point at it.
 */
class Config {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static Config parse(std::istream& is, std::string source = "<config>") {
        Config c;
        c.source_ = std::move(source);
        std::string raw;
        std::string section;
        int line = 0;
        while (std::getline(is, raw)) {
            ++line;
            const std::string text = trim(strip_comment(raw));
            if (text.empty()) continue;
            if (text.front() == '[') {
                if (text.back() != ']') c.fail(line, "unterminated section header");
                section = trim(text.substr(1, text.size() - 2));
                if (section.empty()) c.fail(line, "empty section name");
                c.sections_.emplace(section, line);
                continue;
            }
            const auto eq = text.find('=');
            if (eq == std::string::npos) c.fail(line, "expected 'key = value'");
            const std::string key = trim(text.substr(0, eq));
            if (key.empty()) c.fail(line, "missing key before '='");
            const std::string full = section.empty() ? key : section + "." + key;
            if (c.entries_.count(full)) {
                c.fail(line, "duplicate key '" + full + "' (first set on line " + std::to_string(c.entries_[full].line) + ")");
            }
            c.entries_[full] = {trim(text.substr(eq + 1)), line};
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        return parse(in, path);
    }

    const std::string& source() const { return source_; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

    const Entry& entry(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            const auto dot = key.find('.');
            const std::string section = dot == std::string::npos ? std::string() : key.substr(0, dot);
            auto sec = sections_.find(section);
            const int line = sec == sections_.end() ? 1 : sec->second;
            fail(line, "missing key '" + key.substr(dot == std::string::npos ? 0 : dot + 1) + "'" +
                           (section.empty() ? "" : " in section [" + section + "]"));
        }
        return it->second;
    }

    std::string str(const std::string& key) const { return entry(key).value; }
    std::string str(const std::string& key, const std::string& fallback) const {
        return has(key) ? str(key) : fallback;
    }

    double num(const std::string& key) const {
        const auto& e = entry(key);
        return to_number(e.value, e.line, key);
    }
    double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

    long integer(const std::string& key) const {
        const double v = num(key);
        if (v != std::floor(v)) fail(entry(key).line, "'" + key + "' must be an integer");
        return static_cast<long>(v);
    }
    long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

    /// Comma-separated items; empty items are rejected.
    std::vector<std::string> list(const std::string& key, char sep = ',') const {
        const auto& e = entry(key);
        std::vector<std::string> out;
        std::stringstream ss(e.value);
        std::string item;
        while (std::getline(ss, item, sep)) {
            item = trim(item);
            if (item.empty()) fail(e.line, "empty item in '" + key + "'");
            out.push_back(item);
        }
        if (out.empty()) fail(e.line, "'" + key + "' is empty");
        return out;
    }

    /**
     * Numbers separated by commas. Items may be written b^e, and
     * `2^-1 .. 2^-8` expands to the geometric ladder with ratio 2 between
     * the endpoints (either direction).
     */
    std::vector<double> numbers(const std::string& key) const {
        const auto& e = entry(key);
        const auto dots = e.value.find("..");
        if (dots != std::string::npos) {
            const double a = to_number(trim(e.value.substr(0, dots)), e.line, key);
            const double b = to_number(trim(e.value.substr(dots + 2)), e.line, key);
            if (!(a > 0.0) || !(b > 0.0)) fail(e.line, "ladder endpoints in '" + key + "' must be positive");
            const double steps = std::log2(std::max(a, b) / std::min(a, b));
            if (std::abs(steps - std::round(steps)) > 1e-9) fail(e.line, "ladder endpoints in '" + key + "' must differ by a power of 2");
            std::vector<double> out;
            const int n = static_cast<int>(std::round(steps));
            for (int i = 0; i <= n; ++i) out.push_back(a < b ? std::ldexp(a, i) : std::ldexp(a, -i));
            return out;
        }
        std::vector<double> out;
        for (const auto& item : list(key)) out.push_back(to_number(item, e.line, key));
        return out;
    }

    /// Multi-indices separated by ';', components by ','.
    std::vector<MultiIndex> multi_indices(const std::string& key, int dim) const {
        const auto& e = entry(key);
        std::vector<MultiIndex> out;
        for (const auto& item : list(key, ';')) {
            try {
                out.push_back(parse_multi_index(item, dim));
            } catch (const ConfigError& err) {
                fail(e.line, err.what());
            }
        }
        return out;
    }

    [[noreturn]] void fail(int line, const std::string& message) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + message);
    }

    [[noreturn]] void fail_at(const std::string& key, const std::string& message) const {
        auto it = entries_.find(key);
        fail(it == entries_.end() ? 1 : it->second.line, message);
    }

    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

private:
    static std::string strip_comment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }

    double to_number(const std::string& text, int line, const std::string& key) const {
        const auto caret = text.find('^');
        try {
            if (caret != std::string::npos) {
                return std::pow(parse_double(trim(text.substr(0, caret))), parse_double(trim(text.substr(caret + 1))));
            }
            return parse_double(text);
        } catch (const std::exception&) {
            fail(line, "'" + key + "' expects a number, got '" + text + "'");
        }
    }

    static double parse_double(const std::string& text) {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    }

    std::string source_;
    std::map<std::string, Entry> entries_;
    std::map<std::string, int> sections_;
};

}  // namespace hardy
