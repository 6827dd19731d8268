#pragma once

// Run configuration (INI), profile term syntax, CSV/JSON output with atomic writes.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "mlsw/error.hpp"
#include "mlsw/stratification.hpp"

namespace mlsw::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Numbers
// ---------------------------------------------------------------------------

/// Round-trip formatting with 17 significant digits.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& text, const std::string& what) {
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0') || errno == ERANGE) {
        throw ConfigError(what + ": '" + text + "' is not a number");
    }
    return v;
}

inline std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(what + ": '" + text + "' is not a non-negative integer");
    }
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
    if (errno == ERANGE) throw ConfigError(what + ": '" + text + "' is out of range");
    return static_cast<std::uint64_t>(v);
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_top_level(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (depth < 0) throw ConfigError("unbalanced parentheses in '" + s + "'");
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (depth != 0) throw ConfigError("unbalanced parentheses in '" + s + "'");
    out.push_back(trim(cur));
    return out;
}

// ---------------------------------------------------------------------------
// Config reader
// ---------------------------------------------------------------------------

/// INI file with per-key access tracking; keys never read are rejected by finish().
class ConfigReader {
public:
    ConfigReader() = default;

    static ConfigReader from_file(const std::string& path) {
        ConfigReader r;
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        try {
            boost::property_tree::ini_parser::read_ini(in, r.tree_);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError("config parse error: " + std::string(e.what()));
        }
        return r;
    }

    static ConfigReader from_string(const std::string& text) {
        ConfigReader r;
        std::istringstream in(text);
        try {
            boost::property_tree::ini_parser::read_ini(in, r.tree_);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError("config parse error: " + std::string(e.what()));
        }
        return r;
    }

    [[nodiscard]] std::optional<std::string> raw(const std::string& section, const std::string& key) {
        used_.insert(section + "." + key);
        const auto sec = tree_.get_child_optional(boost::property_tree::ptree::path_type(section, '\0'));
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(boost::property_tree::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    double number(const std::string& section, const std::string& key, double fallback) {
        const auto v = raw(section, key);
        return v ? parse_double(*v, section + "." + key) : fallback;
    }

    std::uint64_t integer(const std::string& section, const std::string& key, std::uint64_t fallback) {
        const auto v = raw(section, key);
        return v ? parse_u64(*v, section + "." + key) : fallback;
    }

    bool flag(const std::string& section, const std::string& key, bool fallback) {
        const auto v = raw(section, key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
        if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
        throw ConfigError(section + "." + key + ": '" + *v + "' is not a boolean");
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback) {
        const auto v = raw(section, key);
        return v ? *v : fallback;
    }

    std::vector<std::size_t> sizes(const std::string& section, const std::string& key,
                                   const std::vector<std::size_t>& fallback) {
        const auto v = raw(section, key);
        if (!v) return fallback;
        std::vector<std::size_t> out;
        for (const auto& item : split_top_level(*v, ',')) {
            out.push_back(static_cast<std::size_t>(parse_u64(item, section + "." + key)));
        }
        return out;
    }

    /// Throws ConfigError naming every key that no reader asked for.
    void finish() const {
        std::vector<std::string> unknown;
        for (const auto& [section, body] : tree_) {
            if (body.empty() && !body.data().empty()) {
                unknown.push_back(section);
                continue;
            }
            for (const auto& [key, value] : body) {
                if (!used_.count(section + "." + key)) unknown.push_back(section + "." + key);
            }
        }
        if (!unknown.empty()) {
            std::string msg = "unknown config key(s):";
            for (const auto& k : unknown) msg += " " + k;
            throw ConfigError(msg);
        }
    }

private:
    boost::property_tree::ptree tree_;
    std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Profile term syntax
//
//   field      := term ('+' term)*
//   term       := xfactor ['*' rhofactor] | rhofactor
//   xfactor    := const(c) | sech2(a, center, width) | cos(a, k, phase)
//   rhofactor  := poly(c0, c1, ...) | rcos(a, omega, phase)
//   background := rhofactor ('+' rhofactor)*
// ---------------------------------------------------------------------------

namespace detail {

struct Call {
    std::string name;
    std::vector<double> args;
};

inline Call parse_call(const std::string& text) {
    const auto open = text.find('(');
    if (text.empty() || open == std::string::npos || text.back() != ')') {
        throw ConfigError("expected name(args) in profile term, got '" + text + "'");
    }
    Call c;
    c.name = trim(text.substr(0, open));
    const std::string inner = text.substr(open + 1, text.size() - open - 2);
    if (!trim(inner).empty()) {
        for (const auto& a : split_top_level(inner, ',')) c.args.push_back(parse_double(a, "profile argument"));
    }
    return c;
}

inline void expect_args(const Call& c, std::size_t n) {
    if (c.args.size() != n) {
        throw ConfigError(c.name + "() takes " + std::to_string(n) + " arguments, got " +
                          std::to_string(c.args.size()));
    }
}

inline std::optional<RhoFunction> rho_factor(const Call& c) {
    if (c.name == "poly") {
        if (c.args.empty()) throw ConfigError("poly() needs at least one coefficient");
        return RhoFunction(Polynomial{c.args});
    }
    if (c.name == "rcos") {
        expect_args(c, 3);
        return RhoFunction(RhoCosine{c.args[0], c.args[1], c.args[2]});
    }
    return std::nullopt;
}

inline std::optional<XFunction> x_factor(const Call& c) {
    if (c.name == "const") {
        expect_args(c, 1);
        return XFunction(XConstant{c.args[0]});
    }
    if (c.name == "sech2") {
        expect_args(c, 3);
        if (!(c.args[2] > 0.0)) throw ConfigError("sech2() width must be > 0");
        return XFunction(XSech2{c.args[0], c.args[1], c.args[2]});
    }
    if (c.name == "cos") {
        expect_args(c, 3);
        return XFunction(XCosine{c.args[0], c.args[1], c.args[2]});
    }
    return std::nullopt;
}

} // namespace detail

inline SeparableField parse_field(const std::string& text) {
    SeparableField f;
    if (trim(text).empty()) return f;
    for (const auto& term : split_top_level(text, '+')) {
        const auto factors = split_top_level(term, '*');
        if (factors.empty() || factors.size() > 2) throw ConfigError("bad profile term '" + term + "'");
        const auto first = detail::parse_call(factors[0]);
        SeparableTerm t;
        if (factors.size() == 2) {
            const auto x = detail::x_factor(first);
            const auto r = detail::rho_factor(detail::parse_call(factors[1]));
            if (!x || !r) throw ConfigError("expected xfactor*rhofactor in '" + term + "'");
            t = {*x, *r};
        } else if (auto x = detail::x_factor(first)) {
            t = {*x, RhoFunction::constant(1.0)};
        } else if (auto r = detail::rho_factor(first)) {
            t = {XConstant{1.0}, *r};
        } else {
            throw ConfigError("unknown profile factor '" + first.name + "'");
        }
        f.terms.push_back(std::move(t));
    }
    return f;
}

inline Background parse_background(const std::string& text) {
    Background b;
    if (trim(text).empty()) return b;
    for (const auto& term : split_top_level(text, '+')) {
        const auto r = detail::rho_factor(detail::parse_call(term));
        if (!r) throw ConfigError("background terms must be poly() or rcos(), got '" + term + "'");
        b.parts.push_back(*r);
    }
    return b;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Writes via a temporary file in the same directory and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot move output into '" + path.string() + "': " + ec.message());
    }
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : columns_(header.size()) { add_row(header); }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_double(v));
        add_row(cells);
    }

    void row_text(const std::vector<std::string>& cells) { add_row(cells); }

    [[nodiscard]] const std::string& str() const noexcept { return text_; }

private:
    void add_row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::logic_error("CsvTable: row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    std::size_t columns_;
    std::string text_;
};

/// JSON number that survives NaN/inf (emitted as null).
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

} // namespace mlsw::io
