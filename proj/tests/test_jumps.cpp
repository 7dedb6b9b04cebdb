#include "smilejump/errors.hpp"
#include "smilejump/jumps.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace smilejump;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const Date kDay0{std::chrono::year{2006} / 1 / 3};

PriceSeries gbm(int days, double vol, std::uint64_t seed, std::vector<std::pair<std::size_t, double>> jumps = {}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const double sd = vol / std::sqrt(252.0 * kMinutesPerDay);
    std::vector<Timestamp> ts;
    std::vector<double> px;
    double x = std::log(100.0);
    const auto cal = trading_days(kDay0, days);
    for (int d = 0; d < days; ++d) {
        for (int i = 0; i < kMinutesPerDay; ++i) {
            x += sd * z(rng);
            for (const auto& [at, size] : jumps) {
                if (at == ts.size()) x += size;
            }
            ts.push_back(session_minute(cal[static_cast<std::size_t>(d)], i));
            px.push_back(std::exp(x));
        }
    }
    return PriceSeries(std::move(ts), std::move(px));
}

} // namespace

TEST_CASE("price series validation") {
    const Timestamp a{kDay0, kSessionOpen}, b{kDay0, kSessionOpen + 1};
    CHECK_THROWS_AS(PriceSeries({b, a}, {1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(PriceSeries({a, b}, {1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(PriceSeries({a}, {1.0, 2.0}), DomainError);
}

TEST_CASE("log returns sample fixed intraday offsets") {
    const PriceSeries s = gbm(2, 0.2, 1);
    const ReturnSeries r5 = log_returns(s, 5);
    CHECK(r5.values.size() == 160);
    CHECK(r5.day_offsets == std::vector<std::size_t>{0, 80, 160});
    CHECK(format_timestamp(r5.end_times[0]) == "2006-01-03T09:36:00");
    CHECK(format_timestamp(r5.end_times[79]) == "2006-01-03T16:11:00");
    CHECK_THAT(r5.values[0], WithinAbs(std::log(s.prices()[5] / s.prices()[0]), 1e-15));
    // No overnight return: the second session starts from its own first bar.
    CHECK_THAT(r5.values[80], WithinAbs(std::log(s.prices()[405 + 5] / s.prices()[405]), 1e-15));
    CHECK(log_returns(s, 15).values.size() == 52);
    CHECK_THROWS_AS(log_returns(s, 5, 1000), InsufficientData);
}

TEST_CASE("bipower sigma matches a direct sum") {
    const std::vector<double> r{0.1, -0.2, 0.3, 0.05, -0.4, 0.2, 0.1};
    // K = 5 at i = 6 uses products j = 3..5: |r3 r2| + |r4 r3| + |r5 r4|.
    const double expected = std::sqrt((0.05 * 0.3 + 0.4 * 0.05 + 0.2 * 0.4) / 3.0);
    CHECK_THAT(bipower_sigma(r, 6, 5).sigma, WithinRel(expected, 1e-14));
    CHECK_THAT(lm_statistic(r, 6, 5).statistic, WithinRel(0.1 / expected, 1e-14));
    CHECK_THROWS_AS(bipower_sigma(r, 4, 5), DomainError);
}

TEST_CASE("zero local volatility") {
    const std::vector<double> r(10, 0.0);
    auto with_jump = r;
    with_jump[9] = 0.01;
    CHECK(lm_statistic(r, 9, 5).statistic == 0.0);
    const LmValue v = lm_statistic(with_jump, 9, 5);
    CHECK(std::isinf(v.statistic));
    CHECK(v.zero_vol_anomaly);
    CHECK(bipower_sigma(r, 9, 5).degenerate);
}

TEST_CASE("Gumbel threshold frozen values") {
    // Independent evaluation of -log(-log(1-a)) S_n + C_n in double precision.
    CHECK_THAT(threshold(80, 0.01), WithinAbs(5.102764688948536, 1e-12));
    CHECK_THAT(threshold(26, 0.01), WithinAbs(4.886913777833948, 1e-12));
    CHECK_THAT(threshold(80, 0.05), WithinAbs(4.412711167727171, 1e-12));
    CHECK(threshold(80, 0.01) > threshold(80, 0.05));
    CHECK_THROWS_AS(threshold(5, 0.01), DomainError);
}

TEST_CASE("simulated threshold") {
    const double a = simulated_threshold(80, 270, 0.01, 20000);
    CHECK(a == simulated_threshold(80, 270, 0.01, 20000));
    CHECK(simulated_threshold(80, 270, 0.05, 20000) < a);
    // Finite-K noise fattens the tail of max |L| relative to max |Z| / c.
    CHECK(a > 0.0);
    CHECK(a < threshold(80, 0.01) * 1.2);
}

TEST_CASE("scale invariance") {
    const PriceSeries s = gbm(6, 0.2, 5, {{405 * 5 + 100, 0.02}});
    const JumpTest t = JumpTest::for_sampling(5);
    const auto a = detect_jumps(s, t);
    const auto b = detect_jumps(s.scaled(37.0), t);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].timestamp == b[i].timestamp);
        CHECK_THAT(a[i].statistic, WithinRel(b[i].statistic, 1e-9));
    }
}

TEST_CASE("early sessions without a full window are untestable") {
    const PriceSeries s = gbm(6, 0.2, 7);
    const JumpScan scan = scan_jumps(s, JumpTest::for_sampling(5));
    REQUIRE(scan.coverage.size() == 6);
    // 270 returns need more than three 80-return sessions.
    CHECK_FALSE(scan.coverage[3].testable);
    CHECK(scan.coverage[4].testable);
    const JumpScan scan15 = scan_jumps(s, JumpTest::for_sampling(15));
    CHECK(scan15.returns_per_day == 26);
    CHECK_FALSE(scan15.coverage[5].testable);
}

TEST_CASE("a large jump is flagged at its return") {
    const std::size_t at = 405 * 5 + 37; // session index 37 of day 5
    const PriceSeries s = gbm(6, 0.2, 9, {{at, 0.02}});
    const auto ev = detect_jumps(s, JumpTest::for_sampling(5));
    REQUIRE(ev.size() >= 1);
    bool found = false;
    for (const auto& e : ev) {
        if (e.timestamp == session_minute(s.days()[5], 40)) {
            found = true;
            CHECK(e.direction == 1);
            CHECK(e.statistic > e.beta_star);
        }
    }
    CHECK(found);
}

TEST_CASE("morning classification") {
    const Date d0 = kDay0, d1 = d0 + std::chrono::days{1}, d2 = d0 + std::chrono::days{2}, d3 = d0 + std::chrono::days{3};
    JumpScan primary, secondary;
    primary.coverage = {{d0, true}, {d1, true}, {d2, true}, {d3, false}};
    secondary.coverage = {{d0, true}, {d1, true}, {d2, true}, {d3, true}};
    JumpEvent e;
    e.timestamp = {d0, 10 * 60};
    primary.events.push_back(e); // morning jump
    e.timestamp = {d1, 14 * 60};
    secondary.events.push_back(e); // afternoon, other sampling only
    const JumpScan scans[] = {primary, secondary};
    const DayPartition p = classify_mornings(scans);
    REQUIRE(p.days.size() == 4);
    CHECK(p.group_of(d0) == DayGroup::jump_morning);
    CHECK(p.group_of(d1) == DayGroup::excluded);
    CHECK(p.group_of(d2) == DayGroup::no_jump);
    CHECK(p.group_of(d3) == DayGroup::excluded);
    CHECK(p.count(DayGroup::no_jump) == 1);
    CHECK(std::string(to_string(DayGroup::jump_morning)) == "jump");
}

TEST_CASE("jump test validation") {
    JumpTest t;
    t.alpha = 1.5;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    CHECK(JumpTest::for_sampling(15).window_k == 156);
    CHECK(JumpTest::for_sampling(5).window_k == 270);
}

TEST_CASE("bipower variance and L under a Gaussian null") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> z;
    const double s = 0.003;
    const int k = 270;
    std::vector<double> r(100000 + k);
    for (auto& v : r) v = s * z(rng);

    double mean_var = 0.0;
    std::vector<double> scaled;
    for (std::size_t i = k; i < r.size(); ++i) {
        const double sig = bipower_sigma(r, i, k).sigma;
        mean_var += sig * sig;
        // Bipower sigma estimates sqrt(2/pi) s, so L * sqrt(2/pi) is standard normal.
        scaled.push_back(lm_statistic(r, i, k).statistic * std::sqrt(2.0 / M_PI));
    }
    mean_var /= static_cast<double>(scaled.size());
    CHECK_THAT(mean_var, WithinRel(2.0 / M_PI * s * s, 0.02));

    std::sort(scaled.begin(), scaled.end());
    const double n = static_cast<double>(scaled.size());
    double d = 0.0;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        const double f = 0.5 * std::erfc(-scaled[i] / std::sqrt(2.0));
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    CHECK(d <= 0.02);
}

TEST_CASE("intraday returns telescope to the session move") {
    const PriceSeries s = gbm(3, 0.3, 12);
    const ReturnSeries rs = log_returns(s, 1, 1);
    const auto px = s.prices();
    for (std::size_t d = 0; d < rs.days.size(); ++d) {
        double sum = 0.0;
        for (std::size_t i = rs.day_offsets[d]; i < rs.day_offsets[d + 1]; ++i) sum += rs.values[i];
        const std::size_t b = s.day_begin(d);
        CHECK_THAT(sum, WithinAbs(std::log(px[b + kMinutesPerDay - 1] / px[b]), 1e-12));
    }
}
