#include "smilejump/calendar.hpp"

#include "smilejump/errors.hpp"

#include <charconv>
#include <cstdio>

namespace smilejump {

namespace {

int parse_int(std::string_view text, std::string_view field) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw SchemaError("bad " + std::string(field) + " in '" + std::string(text) + "'");
    }
    return value;
}

} // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw SchemaError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    const int y = parse_int(text.substr(0, 4), "year");
    const int m = parse_int(text.substr(5, 2), "month");
    const int d = parse_int(text.substr(8, 2), "day");
    const std::chrono::year_month_day ymd{std::chrono::year{y},
                                          std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw SchemaError("invalid date '" + std::string(text) + "'");
    }
    return Date{ymd};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') {
        throw SchemaError("expected YYYY-MM-DDTHH:MM[:SS], got '" + std::string(text) + "'");
    }
    Timestamp ts;
    ts.day = parse_date(text.substr(0, 10));
    const int hh = parse_int(text.substr(11, 2), "hour");
    const int mm = parse_int(text.substr(14, 2), "minute");
    if (text.size() != 16) {
        if (text.size() != 19 || text[16] != ':') {
            throw SchemaError("bad timestamp '" + std::string(text) + "'");
        }
        if (parse_int(text.substr(17, 2), "second") != 0) {
            throw SchemaError("timestamp not on a minute boundary: '" + std::string(text) + "'");
        }
    }
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59) {
        throw SchemaError("bad time of day in '" + std::string(text) + "'");
    }
    ts.minute = hh * 60 + mm;
    return ts;
}

std::string format_minute(int minute) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d:%02d:00", minute / 60, minute % 60);
    return buf;
}

std::string format_timestamp(const Timestamp& ts) {
    return format_date(ts.day) + "T" + format_minute(ts.minute);
}

Timestamp session_minute(Date day, int session_index) {
    return Timestamp{day, kSessionOpen + session_index};
}

std::vector<Date> trading_days(Date first, int count) {
    std::vector<Date> out;
    out.reserve(static_cast<std::size_t>(count));
    Date d = first;
    while (static_cast<int>(out.size()) < count) {
        const std::chrono::weekday wd{d};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
            out.push_back(d);
        }
        d += std::chrono::days{1};
    }
    return out;
}

} // namespace smilejump
