#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>

namespace fixtime {

[[nodiscard]] inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Trimmed, ASCII-lowercased copy; the canonical form for categorical values.
[[nodiscard]] inline std::string normalize_value(std::string_view s) {
    std::string out(trim(s));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace fixtime
