#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace supervisor {

class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(std::string_view sv) {
    const char* ws = " \t\r\n";
    const auto b = sv.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = sv.find_last_not_of(ws);
    return std::string(sv.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view sv, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= sv.size(); ++i) {
        if (i == sv.size() || sv[i] == sep) {
            out.emplace_back(sv.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

/// Splits on `sep`, ignoring separators inside [...] groups.
inline std::vector<std::string> split_bracket_aware(std::string_view sv, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= sv.size(); ++i) {
        if (i == sv.size() || (sv[i] == sep && depth == 0)) {
            out.emplace_back(sv.substr(start, i - start));
            start = i + 1;
        } else if (sv[i] == '[') {
            ++depth;
        } else if (sv[i] == ']') {
            --depth;
        }
    }
    return out;
}

inline double parse_double(std::string_view raw, const std::string& where) {
    const std::string s = trim(raw);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        if (s == "nan") {
            return std::numeric_limits<double>::quiet_NaN();
        }
        throw ParseError(where + ": not a number: '" + s + "'");
    }
    return value;
}

inline long parse_long(std::string_view raw, const std::string& where) {
    const std::string s = trim(raw);
    long value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(where + ": not an integer: '" + s + "'");
    }
    return value;
}

/// Shortest round-trip decimal form; locale independent.
inline std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0.0 ? "inf" : "-inf";
    }
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace detail
}  // namespace supervisor
