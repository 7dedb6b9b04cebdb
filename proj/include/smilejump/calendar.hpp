#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace smilejump {

using Date = std::chrono::sys_days;

// Regular session: 09:31 .. 16:15 inclusive, one bar per minute.
inline constexpr int kSessionOpen = 9 * 60 + 31;
inline constexpr int kSessionClose = 16 * 60 + 15;
inline constexpr int kMinutesPerDay = kSessionClose - kSessionOpen + 1; // 405

// First hour studied around jumps: 09:31 .. 10:30.
inline constexpr int kMorningFirst = kSessionOpen;
inline constexpr int kMorningLast = 10 * 60 + 30;

struct Timestamp {
    Date day{};
    int minute = 0; // minutes since midnight, exchange-local

    auto operator<=>(const Timestamp&) const = default;

    int session_index() const noexcept { return minute - kSessionOpen; }
    bool in_session() const noexcept {
        return minute >= kSessionOpen && minute <= kSessionClose;
    }
};

Date parse_date(std::string_view text);
std::string format_date(Date d);

// Accepts "YYYY-MM-DDTHH:MM[:SS]" or with a space separator. Seconds must be 0.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(const Timestamp& ts);

std::string format_minute(int minute);

Timestamp session_minute(Date day, int session_index);

// Weekdays starting at `first` (weekends skipped; no holiday calendar).
std::vector<Date> trading_days(Date first, int count);

inline int calendar_days_between(Date from, Date to) {
    return static_cast<int>((to - from).count());
}

} // namespace smilejump
