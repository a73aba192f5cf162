#pragma once

#include <cstdint>
#include <string>

namespace stef {

// All timestamps are UTC unix seconds; no local-time handling anywhere.

/// Accepts "YYYY-MM-DDTHH:MM:SS", a space instead of the 'T', and an
/// optional trailing 'Z'. Throws std::invalid_argument on anything else.
int64_t parse_iso8601(const std::string& s);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(int64_t unix_seconds);

inline int hour_of_day(int64_t unix_seconds) {
    int64_t h = (unix_seconds / 3600) % 24;
    if (h < 0) h += 24;
    return static_cast<int>(h);
}

/// 0 = Monday .. 6 = Sunday.
inline int day_of_week(int64_t unix_seconds) {
    int64_t days = unix_seconds / 86400;
    if (unix_seconds % 86400 < 0) --days;
    int64_t d = (days + 3) % 7;  // 1970-01-01 was a Thursday
    if (d < 0) d += 7;
    return static_cast<int>(d);
}

/// 0 = Monday 00:00 .. 167 = Sunday 23:00.
inline int hour_of_week(int64_t unix_seconds) {
    return day_of_week(unix_seconds) * 24 + hour_of_day(unix_seconds);
}

}  // namespace stef
