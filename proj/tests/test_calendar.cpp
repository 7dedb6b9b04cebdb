#include "smilejump/calendar.hpp"
#include "smilejump/errors.hpp"

#include <catch_amalgamated.hpp>

using namespace smilejump;
using namespace std::chrono;

TEST_CASE("session constants") {
    CHECK(kMinutesPerDay == 405);
    CHECK(format_minute(kSessionOpen) == "09:31:00");
    CHECK(format_minute(kSessionClose) == "16:15:00");
    CHECK(format_minute(kMorningLast) == "10:30:00");
}

TEST_CASE("timestamps round trip") {
    const Timestamp ts = parse_timestamp("2007-03-14T10:05:00");
    CHECK(ts.day == sys_days{year{2007} / 3 / 14});
    CHECK(ts.minute == 10 * 60 + 5);
    CHECK(format_timestamp(ts) == "2007-03-14T10:05:00");
    CHECK(parse_timestamp("2007-03-14 10:05") == ts);
    CHECK(ts.session_index() == 34);
    CHECK(session_minute(ts.day, 34) == ts);
}

TEST_CASE("malformed timestamps are rejected") {
    CHECK_THROWS_AS(parse_timestamp("2007-03-14T10:05:30"), SchemaError);
    CHECK_THROWS_AS(parse_timestamp("2007-02-30T10:05:00"), SchemaError);
    CHECK_THROWS_AS(parse_timestamp("20070314 1005"), SchemaError);
    CHECK_THROWS_AS(parse_date("2007-13-01"), SchemaError);
}

TEST_CASE("trading days skip weekends") {
    const auto days = trading_days(sys_days{year{2006} / 1 / 6}, 3); // a Friday
    REQUIRE(days.size() == 3);
    CHECK(format_date(days[0]) == "2006-01-06");
    CHECK(format_date(days[1]) == "2006-01-09");
    CHECK(format_date(days[2]) == "2006-01-10");
    CHECK(calendar_days_between(days[0], days[2]) == 4);
}

TEST_CASE("in_session bounds") {
    const Date d = sys_days{year{2006} / 1 / 3};
    CHECK_FALSE(Timestamp{d, kSessionOpen - 1}.in_session());
    CHECK(Timestamp{d, kSessionOpen}.in_session());
    CHECK(Timestamp{d, kSessionClose}.in_session());
    CHECK_FALSE(Timestamp{d, kSessionClose + 1}.in_session());
}
