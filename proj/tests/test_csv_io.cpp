#include "smilejump/csv_io.hpp"
#include "smilejump/errors.hpp"
#include "smilejump/synth.hpp"

#include <catch_amalgamated.hpp>

#include <fstream>

using namespace smilejump;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("smilejump_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

} // namespace

TEST_CASE("doubles round trip through text") {
    for (double v : {0.1, 1.0 / 3.0, 123456.789e-7, 5e-324, 1.7976931348623157e308}) {
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK_THROWS_AS(parse_double("1.5x"), SchemaError);
}

TEST_CASE("synthetic market round trips through the ingest path") {
    MarketSpec s;
    s.days = 2;
    s.jump_intensity = 1.0;
    const SyntheticMarket m(s);
    const fs::path dir = scratch("roundtrip");
    write_underlying_csv(dir / "underlying.csv", m.underlying());
    std::vector<OptionQuote> expected;
    for (std::size_t d = 0; d < 2; ++d) {
        const auto q = m.chain_day(d);
        write_text(dir / "options" / ("options_" + format_date(m.days()[d]) + ".csv"), options_csv(q));
        expected.insert(expected.end(), q.begin(), q.end());
    }
    IngestReport rep;
    const PriceSeries u = read_underlying_csv(dir / "underlying.csv", rep);
    const auto quotes = read_options_dir(dir / "options", 0.0, rep);
    CHECK(std::equal(u.prices().begin(), u.prices().end(), m.underlying().prices().begin()));
    CHECK(quotes == expected);
    CHECK(rep.rejected_total() == 0);
    CHECK(rep.rows_read == rep.rows_accepted + rep.rejected_total());
    CHECK(rep.days_covered == 2);
}

TEST_CASE("option rows are screened with reasons and line numbers") {
    const fs::path dir = scratch("screen");
    write_file(dir / "o.csv",
               "timestamp,expiry,strike,right,bid,ask,underlying_price\n"
               "2006-01-03T10:00:00,2006-03-07,100,C,2.0,2.1,100\n"   // ok
               "2006-01-03T10:00:00,2006-03-07,100,C,2.2,2.1,100\n"   // crossed
               "2006-01-03T10:00:00,2006-03-07,100,C,0,0.1,100\n"     // zero bid
               "2006-01-03T10:00:00,2006-03-07,50,C,20,21,100\n"      // below intrinsic
               "2006-01-03T09:00:00,2006-03-07,100,C,2.0,2.1,100\n"   // pre-open
               "2006-01-03T10:00:00,2006-01-03,100,C,2.0,2.1,100\n"   // expired
               "2006-01-03T10:00:00,2006-03-07,100,X,2.0,2.1,100\n"   // schema
               "2006-01-03T10:00:00,2006-03-07,100,C,2.0\n");          // schema
    IngestReport rep;
    const auto q = read_options_csv(dir / "o.csv", 0.0, rep);
    CHECK(q.size() == 1);
    CHECK(rep.rows_read == 8);
    CHECK(rep.rejected.at("crossed quote") == 1);
    CHECK(rep.rejected.at("zero bid") == 1);
    CHECK(rep.rejected.at("bound violation") == 1);
    CHECK(rep.rejected.at("outside session") == 1);
    CHECK(rep.rejected.at("expired") == 1);
    CHECK(rep.rejected.at("schema") == 2);
    CHECK(rep.examples[0].line == 3);
    CHECK(rep.examples[0].reason == "crossed quote");
    CHECK(rep.rows_read == rep.rows_accepted + rep.rejected_total());
}

TEST_CASE("fatal input problems") {
    const fs::path dir = scratch("fatal");
    write_file(dir / "empty.csv", "");
    IngestReport rep;
    try {
        read_underlying_csv(dir / "empty.csv", rep);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("empty.csv") != std::string::npos);
    }
    CHECK_THROWS_AS(read_underlying_csv(dir / "missing.csv", rep), ConfigError);
    write_file(dir / "bad_header.csv", "time,px\n2006-01-03T09:31:00,1\n");
    CHECK_THROWS_AS(read_underlying_csv(dir / "bad_header.csv", rep), SchemaError);
    CHECK_THROWS_AS(read_options_dir(dir / "nowhere", 0.0, rep), ConfigError);
}

TEST_CASE("underlying gaps are forward-filled") {
    const fs::path dir = scratch("fill");
    write_file(dir / "u.csv",
               "timestamp,price\n"
               "2006-01-03T09:33:00,101\n"
               "2006-01-03T09:35:00,102\n"
               "2006-01-03T08:00:00,99\n");
    IngestReport rep;
    const PriceSeries s = read_underlying_csv(dir / "u.csv", rep);
    REQUIRE(s.prices().size() == 405);
    CHECK(s.prices()[0] == 101.0); // leading minutes take the first price
    CHECK(s.prices()[2] == 101.0);
    CHECK(s.prices()[3] == 101.0);
    CHECK(s.prices()[4] == 102.0);
    CHECK(s.prices()[404] == 102.0);
    CHECK(rep.underlying_filled == 403);
    CHECK(rep.rejected.at("outside session") == 1);
}

TEST_CASE("intermediate files reload exactly") {
    const fs::path dir = scratch("inter");
    DayPartition p;
    p.days = {Date{std::chrono::year{2006} / 1 / 3}, Date{std::chrono::year{2006} / 1 / 4}};
    p.groups = {DayGroup::jump_morning, DayGroup::excluded};
    p.morning_events = {2, 0};
    write_text(dir / "days.csv", partition_csv(p));
    const DayPartition q = read_partition_csv(dir / "days.csv");
    CHECK(q.days == p.days);
    CHECK(q.groups == p.groups);
    CHECK(q.morning_events == p.morning_events);

    ScorePanel sp;
    sp.tau = 0.5;
    sp.rows = {{p.days[0], kSessionOpen + 1}, {p.days[0], kSessionOpen + 2}};
    sp.scores.resize(2, 3);
    sp.scores << 1.0 / 3.0, -2e-7, 5.0, 0.1, 0.2, -0.3;
    write_text(dir / "scores.csv", scores_csv(sp));
    const ScorePanel back = read_scores_csv(dir / "scores.csv", 0.5);
    CHECK(back.rows == sp.rows);
    CHECK(back.scores == sp.scores);

    JumpEvent e;
    e.timestamp = sp.rows[1];
    e.statistic = -7.25;
    e.beta_star = 4.9;
    e.log_return = -0.0123;
    e.local_sigma = 0.0017;
    write_text(dir / "jumps.csv", jumps_csv({e}));
    const auto ev = read_jumps_csv(dir / "jumps.csv");
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].statistic == e.statistic);
    CHECK(ev[0].direction == -1);
    CHECK(tau_tag(0.25) == "0.25");
}
