#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace pairrank {

/// Shortest decimal text that parses back to the same double.
inline std::string format_real(double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

/// Fixed-point text, `digits` after the radix point.
inline std::string format_fixed(double value, int digits)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, digits);
    return std::string(buf, ptr);
}

inline std::vector<std::string_view> split_on(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace pairrank
