#pragma once

// Minimal TOML subset for experiment configs: top-level and [table] /
// [[array-of-tables]] sections, key = value pairs with strings, numbers,
// booleans and flat arrays, and # comments. No dotted keys, no inline
// tables, no multi-line strings (the `schema` subcommand documents this).

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace liouville::run {

class TomlValue;
using TomlTable = std::map<std::string, TomlValue>;
using TomlArray = std::vector<TomlValue>;

class TomlValue {
public:
    using Storage = std::variant<std::string, double, bool, TomlArray, TomlTable>;

    TomlValue() : v_(false) {}
    TomlValue(std::string s) : v_(std::move(s)) {}
    TomlValue(double d) : v_(d) {}
    TomlValue(bool b) : v_(b) {}
    TomlValue(TomlArray a) : v_(std::move(a)) {}
    TomlValue(TomlTable t) : v_(std::move(t)) {}

    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_number() const { return std::holds_alternative<double>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_array() const { return std::holds_alternative<TomlArray>(v_); }
    bool is_table() const { return std::holds_alternative<TomlTable>(v_); }

    const std::string& as_string() const { return get<std::string>("string"); }
    double as_number() const { return get<double>("number"); }
    bool as_bool() const { return get<bool>("boolean"); }
    const TomlArray& as_array() const { return get<TomlArray>("array"); }
    const TomlTable& as_table() const { return get<TomlTable>("table"); }
    TomlTable& as_table() { return std::get<TomlTable>(v_); }
    TomlArray& as_array() { return std::get<TomlArray>(v_); }

private:
    template <class T>
    const T& get(const char* what) const {
        if (!std::holds_alternative<T>(v_))
            throw std::runtime_error(std::string("toml: value is not a ") + what);
        return std::get<T>(v_);
    }
    Storage v_;
};

class TomlError : public std::runtime_error {
public:
    TomlError(int line, const std::string& msg)
        : std::runtime_error("toml:" + std::to_string(line) + ": " + msg) {}
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Removes a trailing comment, respecting quoted strings.
inline std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

inline bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

inline TomlValue parse_scalar(const std::string& raw, int line);

inline TomlValue parse_value(const std::string& raw, int line) {
    std::string s = strip(raw);
    if (s.empty()) throw TomlError(line, "missing value");
    if (s.front() == '[') {
        if (s.back() != ']') throw TomlError(line, "unterminated array");
        TomlArray arr;
        std::string body = s.substr(1, s.size() - 2);
        std::string cur;
        bool in_str = false;
        int depth = 0;
        for (char c : body) {
            if (c == '"') in_str = !in_str;
            if (!in_str) {
                if (c == '[') ++depth;
                if (c == ']') --depth;
                if (c == ',' && depth == 0) {
                    if (!strip(cur).empty()) arr.push_back(parse_value(cur, line));
                    cur.clear();
                    continue;
                }
            }
            cur += c;
        }
        if (!strip(cur).empty()) arr.push_back(parse_value(cur, line));
        return TomlValue(std::move(arr));
    }
    return parse_scalar(s, line);
}

inline TomlValue parse_scalar(const std::string& s, int line) {
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw TomlError(line, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '\\' && i + 2 < s.size()) {
                char n = s[++i];
                out += (n == 'n' ? '\n' : n == 't' ? '\t' : n);
            } else {
                out += s[i];
            }
        }
        return TomlValue(std::move(out));
    }
    if (s == "true") return TomlValue(true);
    if (s == "false") return TomlValue(false);
    try {
        std::size_t used = 0;
        double d = std::stod(s, &used);
        if (used == s.size()) return TomlValue(d);
    } catch (...) {
    }
    throw TomlError(line, "cannot parse value '" + s + "'");
}

}  // namespace detail

inline TomlTable parse_toml(const std::string& text) {
    TomlTable root;
    TomlTable* current = &root;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        line = detail::strip(detail::strip_comment(line));
        if (line.empty()) continue;

        if (line.front() == '[') {
            bool array_table = line.size() > 1 && line[1] == '[';
            std::string close = array_table ? "]]" : "]";
            if (line.substr(line.size() - close.size()) != close)
                throw TomlError(line_no, "unterminated table header");
            std::string name = detail::strip(
                line.substr(array_table ? 2 : 1, line.size() - 2 * (array_table ? 2 : 1)));
            if (!detail::valid_key(name))
                throw TomlError(line_no, "bad table name '" + name + "'");
            if (array_table) {
                auto it = root.find(name);
                if (it == root.end())
                    it = root.emplace(name, TomlValue(TomlArray{})).first;
                else if (!it->second.is_array())
                    throw TomlError(line_no, "'" + name + "' is not an array of tables");
                it->second.as_array().push_back(TomlValue(TomlTable{}));
                current = &it->second.as_array().back().as_table();
            } else {
                auto [it, fresh] = root.emplace(name, TomlValue(TomlTable{}));
                if (!fresh && !it->second.is_table())
                    throw TomlError(line_no, "duplicate key '" + name + "'");
                current = &it->second.as_table();
            }
            continue;
        }

        std::size_t eq = std::string::npos;
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '=' && !in_str) {
                eq = i;
                break;
            }
        }
        if (eq == std::string::npos) throw TomlError(line_no, "expected key = value");
        std::string key = detail::strip(line.substr(0, eq));
        if (!detail::valid_key(key)) throw TomlError(line_no, "bad key '" + key + "'");
        if (current->count(key)) throw TomlError(line_no, "duplicate key '" + key + "'");
        current->emplace(key, detail::parse_value(line.substr(eq + 1), line_no));
    }
    return root;
}

// Lookup helpers with defaults.
inline double toml_number(const TomlTable& t, const std::string& key, double fallback) {
    auto it = t.find(key);
    return it == t.end() ? fallback : it->second.as_number();
}
inline std::string toml_string(const TomlTable& t, const std::string& key,
                               const std::string& fallback) {
    auto it = t.find(key);
    return it == t.end() ? fallback : it->second.as_string();
}
inline bool toml_bool(const TomlTable& t, const std::string& key, bool fallback) {
    auto it = t.find(key);
    return it == t.end() ? fallback : it->second.as_bool();
}
inline std::vector<double> toml_numbers(const TomlTable& t, const std::string& key,
                                        std::vector<double> fallback = {}) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (it->second.is_number()) return {it->second.as_number()};
    std::vector<double> out;
    for (const auto& v : it->second.as_array()) out.push_back(v.as_number());
    return out;
}

}  // namespace liouville::run
