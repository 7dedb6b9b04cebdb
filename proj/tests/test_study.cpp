#include "smilejump/errors.hpp"
#include "smilejump/study.hpp"

#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <random>

using namespace smilejump;
using Catch::Matchers::WithinAbs;

namespace {

const Date kDay0{std::chrono::year{2006} / 1 / 3};

std::vector<DayScoreSummary> synthetic_summaries(int jump, int nojump, double shift, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<DayScoreSummary> out;
    int day = 0;
    for (double tau : {0.25, 0.5, 0.75}) {
        day = 0;
        for (int g = 0; g < jump + nojump; ++g, ++day) {
            const bool is_jump = g < jump;
            for (int pc = 1; pc <= 3; ++pc) {
                DayScoreSummary s;
                s.day = kDay0 + std::chrono::days{day};
                s.group = is_jump ? DayGroup::jump_morning : DayGroup::no_jump;
                s.pc = pc;
                s.tau = tau;
                s.mu = z(rng) + (is_jump && pc == 1 ? shift : 0.0);
                s.nu = std::exp(z(rng));
                s.minutes = 59;
                out.push_back(s);
            }
        }
    }
    return out;
}

std::vector<ComponentInfo> components(int sign1 = 1) {
    std::vector<ComponentInfo> c;
    for (double tau : {0.25, 0.5, 0.75}) {
        c.push_back({tau, 1, sign1, SmileRegion::atm});
        c.push_back({tau, 2, 1, SmileRegion::otm_call});
        c.push_back({tau, 3, 1, SmileRegion::otm_put});
    }
    return c;
}

} // namespace

TEST_CASE("empirical quantile and trimming golden values") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    CHECK_THAT(empirical_quantile(v, 0.02), WithinAbs(2.98, 1e-12));
    CHECK_THAT(empirical_quantile(v, 0.98), WithinAbs(98.02, 1e-12));
    CHECK(empirical_quantile(v, 0.0) == 1.0);
    CHECK(empirical_quantile(v, 1.0) == 100.0);
    const TrimmedSample t = trim(v);
    CHECK(t.after == 96);
    CHECK(t.values.front() == 3.0);
    CHECK(t.values.back() == 98.0);
    CHECK_FALSE(t.skipped);
    CHECK_THROWS_AS(empirical_quantile(v, 1.5), DomainError);
}

TEST_CASE("small samples are not trimmed") {
    const std::vector<double> v{5, 1, 9, 3};
    const TrimmedSample t = trim(v);
    CHECK(t.skipped);
    CHECK(t.values == v);
}

TEST_CASE("trimming keeps input order and is idempotent on bounds") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    std::vector<double> v(300);
    for (auto& x : v) x = z(rng);
    const TrimmedSample t = trim(v);
    for (double x : t.values) {
        CHECK(x >= t.lo_bound);
        CHECK(x <= t.hi_bound);
    }
    std::size_t j = 0;
    for (double x : v) {
        if (j < t.values.size() && x == t.values[j]) ++j;
    }
    CHECK(j == t.values.size());
}

TEST_CASE("effect symbols") {
    CHECK(ks_effect({0.01, 0.005, 0.9}, 0.05) == Effect::higher);
    CHECK(ks_effect({0.01, 0.9, 0.005}, 0.05) == Effect::lower);
    CHECK(ks_effect({0.2, 0.01, 0.9}, 0.05) == Effect::none);
    CHECK(ks_effect({0.01, 0.02, 0.03}, 0.05) == Effect::higher);
    CHECK(welch_effect({0.01, 0.99, 0.005}, 0.05) == Effect::higher);
    CHECK(welch_effect({0.01, 0.005, 0.99}, 0.05) == Effect::lower);
    CHECK(effect_symbol(Effect::higher, 1) == '+');
    CHECK(effect_symbol(Effect::higher, -1) == '-');
    CHECK(effect_symbol(Effect::lower, -1) == '+');
    CHECK(effect_symbol(Effect::none, -1) == '=');
}

TEST_CASE("a shifted jump group is detected in the mean column") {
    const auto s = synthetic_summaries(290, 940, 0.5, 1);
    const TestReport r = run_study(s, components());
    REQUIRE(r.components.size() == 9);
    for (double tau : {0.25, 0.5, 0.75}) {
        const ComponentReport* c = r.find(tau, 1);
        REQUIRE(c);
        CHECK(c->mean.ks_p.h0s < 0.01);
        CHECK(c->mean.ks_symbol == '+');
        CHECK(c->mean.welch_symbol == '+');
        CHECK(c->mean.n_jump_raw == 290);
        CHECK(c->mean.n_jump < 290);
    }
    // A negative general sign flips the printed direction.
    const TestReport flipped = run_study(s, components(-1));
    CHECK(flipped.find(0.5, 1)->mean.ks_symbol == '-');
}

TEST_CASE("input order does not change the report") {
    auto s = synthetic_summaries(40, 120, 0.3, 2);
    const std::string a = report_json(run_study(s, components()));
    std::shuffle(s.begin(), s.end(), std::mt19937_64(3));
    CHECK(report_json(run_study(s, components())) == a);
}

TEST_CASE("cells without enough days are marked insufficient") {
    const auto s = synthetic_summaries(1, 30, 0.0, 5);
    const TestReport r = run_study(s, components());
    CHECK_FALSE(r.find(0.25, 1)->mean.sufficient);
    CHECK(r.find(0.25, 1)->mean.ks_symbol == '?');
    CHECK_FALSE(r.all_neutral());
    const std::string csv = report_csv(r);
    CHECK(csv.find("KS,M,3M,pos,NA,NA,NA") != std::string::npos);
}

TEST_CASE("report.csv layout") {
    const TestReport r = run_study(synthetic_summaries(50, 150, 0.0, 6), components());
    const std::string csv = report_csv(r);
    std::vector<std::string> lines;
    std::stringstream ss(csv);
    for (std::string l; std::getline(ss, l);) lines.push_back(l);
    REQUIRE(lines.size() == 13);
    CHECK(lines[0] ==
          "test,sample,maturity,pc1_sign,pc1_H0,pc1_H0s,pc1_H0g,pc2_sign,pc2_H0,pc2_H0s,pc2_H0g,pc3_sign,pc3_H0,"
          "pc3_H0s,pc3_H0g");
    CHECK(lines[1].rfind("KS,M,3M,", 0) == 0);
    CHECK(lines[4].rfind("KS,Sigma,3M,", 0) == 0);
    CHECK(lines[7].rfind("WelchU,M,3M,", 0) == 0);
    CHECK(lines[12].rfind("WelchU,Sigma,9M,", 0) == 0);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 14);
    }
    const auto j = nlohmann::json::parse(report_json(r));
    CHECK(j["components"].size() == 9);
    CHECK(j["summary_grid"][0]["maturity"] == "3M");
}

TEST_CASE("day summaries use first-hour rows only") {
    ScorePanel sp;
    sp.tau = 0.5;
    const Date d0 = kDay0, d1 = kDay0 + std::chrono::days{1};
    std::vector<double> vals;
    for (Date d : {d0, d1}) {
        for (int idx = 1; idx < 120; ++idx) {
            sp.rows.push_back(session_minute(d, idx));
            vals.push_back(idx < 60 ? idx : 1000.0);
        }
    }
    sp.scores.resize(static_cast<Eigen::Index>(vals.size()), 3);
    for (std::size_t i = 0; i < vals.size(); ++i) sp.scores.row(static_cast<Eigen::Index>(i)).setConstant(vals[i]);
    DayPartition p;
    p.days = {d0, d1};
    p.groups = {DayGroup::jump_morning, DayGroup::no_jump};
    p.morning_events = {1, 0};
    const SummaryResult res = day_summaries(sp, p);
    REQUIRE(res.summaries.size() == 6);
    // Minutes 09:32 .. 10:30 carry values 1..59.
    CHECK(res.summaries[0].minutes == 59);
    CHECK_THAT(res.summaries[0].mu, WithinAbs(30.0, 1e-12));
    CHECK_THAT(res.summaries[0].nu, WithinAbs(59.0 * 60.0 / 12.0, 1e-9));
    SummaryOptions strict;
    strict.min_minutes = 60;
    CHECK(day_summaries(sp, p, strict).insufficient_days.size() == 2);
}

TEST_CASE("maturity labels") {
    CHECK(maturity_label(0.25) == "3M");
    CHECK(maturity_label(0.5) == "6M");
    CHECK(maturity_label(0.75) == "9M");
}
