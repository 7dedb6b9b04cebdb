#include "smilejump/errors.hpp"
#include "smilejump/kernels.hpp"
#include "smilejump/synth.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace smilejump;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<MinuteSmiles> smiles_of_day(const SyntheticMarket& m, std::size_t d) {
    const auto quotes = m.chain_day(d);
    std::vector<MinuteQuotes> minutes;
    for (std::size_t i = 0; i < quotes.size();) {
        std::size_t j = i;
        while (j < quotes.size() && quotes[j].timestamp == quotes[i].timestamp) ++j;
        minutes.push_back({quotes[i].timestamp, std::span<const OptionQuote>(quotes).subspan(i, j - i)});
        i = j;
    }
    return extract_minute_smiles(minutes, SurfaceConfig{});
}

} // namespace

TEST_CASE("zero volatility and no jumps give a constant price") {
    MarketSpec s;
    s.days = 3;
    s.annual_vol = 0.0;
    const UnderlyingPath p = gen_underlying(s);
    for (double v : p.series.prices()) CHECK(v == 100.0);
    CHECK(p.jumps.empty());
}

TEST_CASE("realized variance matches the diffusion") {
    MarketSpec s;
    s.days = 10000;
    const UnderlyingPath p = gen_underlying(s);
    const auto px = p.series.prices();
    double total = 0.0;
    for (std::size_t i = 1; i < px.size(); ++i) total += std::pow(std::log(px[i] / px[i - 1]), 2);
    // Every session carries 405 increments (the first links to the previous close).
    const double per_day = total / (static_cast<double>(px.size() - 1) / kMinutesPerDay);
    CHECK_THAT(per_day, WithinRel(0.04 / 252.0, 0.01));
}

TEST_CASE("Poisson jump count") {
    MarketSpec s;
    s.days = 10000;
    s.jump_intensity = 1.0;
    const UnderlyingPath p = gen_underlying(s);
    const double mean = static_cast<double>(p.jumps.size()) / s.days;
    CHECK(std::abs(mean - 1.0) < 2.0 * std::sqrt(1.0 / s.days) * 1.5);
}

TEST_CASE("forced morning jumps define the true groups") {
    MarketSpec s;
    s.days = 40;
    s.forced_morning_jump_days = 12;
    s.jump_free_days = 7;
    const SyntheticMarket m(s);
    CHECK(m.true_jumps().size() == 12);
    int jump_days = 0;
    for (std::size_t d = 0; d < m.true_groups().size(); ++d) {
        if (m.true_groups()[d] == DayGroup::jump_morning) {
            ++jump_days;
            CHECK(d >= 7);
        }
    }
    CHECK(jump_days == 12);
    for (const auto& j : m.true_jumps()) {
        CHECK(j.timestamp.session_index() >= 1);
        CHECK(j.timestamp.session_index() <= 45);
        CHECK(std::abs(std::abs(j.log_size) - 0.015) < 0.015);
    }
}

TEST_CASE("identical spec and seed give an identical market") {
    MarketSpec s;
    s.days = 5;
    s.jump_intensity = 0.5;
    const SyntheticMarket a(s), b(s);
    CHECK(std::equal(a.underlying().prices().begin(), a.underlying().prices().end(), b.underlying().prices().begin()));
    CHECK(a.chain_day(3) == b.chain_day(3));
    s.seed = 2;
    const SyntheticMarket c(s);
    CHECK(a.underlying().prices()[100] != c.underlying().prices()[100]);
}

TEST_CASE("quotes reproduce the generating smile") {
    MarketSpec s;
    s.days = 2;
    const SyntheticMarket m(s);
    const auto quotes = m.chain_day(1);
    CHECK(quotes.size() == 405u * 5u * 9u);
    const FactorPath f = m.factors(1);
    for (std::size_t i = 0; i < quotes.size(); i += 37) {
        const auto& q = quotes[i];
        const int idx = q.timestamp.session_index();
        const double tau = calendar_days_between(q.timestamp.day, q.expiry) / 365.0;
        const double sigma = m.iv(1, f, idx, q.strike / q.spot, tau);
        const double price = bs_price({q.spot, q.strike, 0.0, tau, sigma, q.right});
        CHECK_THAT(q.mid(), WithinAbs(price, 1e-10));
        CHECK(q.bid < q.ask);
        const auto b = price_bounds(q.spot, q.strike, 0.0, tau, q.right);
        CHECK(q.mid() > b.lower);
        CHECK(q.mid() < b.upper);
        CHECK(q.right == otm_right(q.spot, q.strike));
    }
}

TEST_CASE("flat smile is recovered in every bin") {
    MarketSpec s;
    s.days = 1;
    for (auto& p : s.smile) p = {0.23, 0.0, 0.0};
    s.level_sd = s.skew_sd = s.curvature_sd = 0.0;
    const SyntheticMarket m(s);
    for (const auto& ms : smiles_of_day(m, 0)) {
        for (const auto& slice : ms.by_tau) {
            REQUIRE(slice.has_value());
            for (double v : *slice) CHECK_THAT(v, WithinAbs(0.23, 1e-3));
        }
    }
}

TEST_CASE("extracted smiles match the closed form") {
    MarketSpec s;
    s.days = 1;
    const SyntheticMarket m(s);
    const FactorPath f = m.factors(0);
    const auto smiles = smiles_of_day(m, 0);
    const MoneynessGrid grid;
    const SurfaceConfig cfg;
    double worst = 0.0;
    for (const auto& ms : smiles) {
        for (std::size_t t = 0; t < cfg.taus.size(); ++t) {
            REQUIRE(ms.by_tau[t].has_value());
            for (std::size_t k = 0; k < kBinCount; ++k) {
                const double truth = m.iv(0, f, ms.ts.session_index(), grid.center(k), cfg.taus[t]);
                worst = std::max(worst, std::abs((*ms.by_tau[t])[k] - truth));
            }
        }
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("three-factor panel design") {
    const FactorPanel fp = gen_factor_panel(1000, 0.15, 1);
    CHECK(fp.panel.values.rows() == 1000);
    CHECK((fp.loadings.transpose() * fp.loadings - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THAT(fp.design_explained, WithinAbs(0.8954, 1e-3));
}

TEST_CASE("spec validation") {
    MarketSpec s;
    s.minutes_per_day = 390;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = MarketSpec{};
    s.annual_vol = -0.1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = MarketSpec{};
    s.days = 10;
    s.forced_morning_jump_days = 11;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("knot factor increments carry the configured correlation") {
    MarketSpec s;
    s.days = 40;
    s.knot_correlation = 0.8;
    const SyntheticMarket m(s);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t d = 0; d < 40; ++d) {
        const FactorPath f = m.factors(d);
        for (std::size_t i = 1; i < kMinutesPerDay; ++i) {
            const double a = f.level[0][i] - f.level[0][i - 1];
            const double b = f.level[2][i] - f.level[2][i - 1];
            sxy += a * b;
            sxx += a * a;
            syy += b * b;
        }
    }
    // 16160 increments: sd of the sample correlation is about 0.003.
    CHECK_THAT(sxy / std::sqrt(sxx * syy), WithinAbs(0.8, 0.015));
    CHECK_THAT(sxx / (40.0 * 404.0), WithinRel(s.level_sd * s.level_sd, 0.03));
}

TEST_CASE("fully correlated knots move every maturity together") {
    MarketSpec s;
    s.days = 1;
    s.knot_correlation = 1.0;
    const SyntheticMarket m(s);
    const FactorPath f = m.factors(0);
    for (int i = 1; i < kMinutesPerDay; i += 17) {
        const double d25 = m.iv(0, f, i, 1.1, 0.25) - m.iv(0, f, i - 1, 1.1, 0.25);
        const double d75 = m.iv(0, f, i, 1.1, 0.75) - m.iv(0, f, i - 1, 1.1, 0.75);
        CHECK_THAT(d25, WithinAbs(d75, 1e-15));
    }
}
