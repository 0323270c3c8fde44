#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace fixtime {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Parses ISO-8601 timestamps such as `2017-05-20T10:00:00Z`,
/// `2017-05-20T10:00:00.123+0000` or `2017-05-20 10:00`. A missing offset
/// is read as UTC; a date alone means midnight UTC.
[[nodiscard]] std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Always emits `YYYY-MM-DDTHH:MM:SS.mmmZ`.
[[nodiscard]] std::string format_timestamp(Timestamp t);

/// Calendar-time difference `to - from` in 24-hour days.
[[nodiscard]] inline double elapsed_days(Timestamp from, Timestamp to) {
    return static_cast<double>((to - from).count()) / 86'400'000.0;
}

}  // namespace fixtime
