#pragma once

#include "smilejump/jumps.hpp"
#include "smilejump/pricing.hpp"
#include "smilejump/smilepca.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace smilejump {

/// IV(m) = a + b (m - 1) + c (m - 1)^2 at one maturity.
struct SmileParams {
    double a = 0.2;
    double b = -0.3;
    double c = 0.5;
};

struct MarketSpec {
    Date first_day = Date{std::chrono::year{2006} / 1 / 3};
    int days = 250;
    int minutes_per_day = kMinutesPerDay;
    double spot0 = 100.0;
    double annual_vol = 0.2;
    double rate = 0.0;

    // Price jumps. Log jump sizes are Normal(jump_mean, jump_sd); with
    // random_jump_sign the sign is flipped with probability 1/2.
    double jump_intensity = 0.0; // Poisson arrivals per day, uniform over the session
    double jump_mean = 0.015;
    double jump_sd = 0.002;
    bool random_jump_sign = true;
    // When >= 0: exactly this many days (drawn among days >= jump_free_days)
    // carry one jump at a session index in [1, forced_jump_last_index].
    int forced_morning_jump_days = -1;
    int forced_jump_last_index = 45;
    int jump_free_days = 0;

    // Smile parameters at the knot maturities, Lagrange-interpolated in tau.
    std::array<double, 3> knot_taus{0.25, 0.5, 0.75};
    std::array<SmileParams, 3> smile{SmileParams{0.20, -0.30, 0.50}, SmileParams{0.21, -0.25, 0.40},
                                     SmileParams{0.22, -0.20, 0.30}};

    // Per-minute sd of the intraday random-walk factors (reset every session).
    // Each knot maturity carries its own walks; increments of one factor are
    // correlated knot_correlation across knots, and the factor values are
    // interpolated in tau like the smile parameters.
    double level_sd = 4e-4;
    double skew_sd = 1.5e-3;
    double curvature_sd = 4e-3;
    double knot_correlation = 0.8;

    // Jump-day effect on the level factor during the first effect_minutes of
    // jump-morning sessions: drift delta_level per minute and increments
    // scaled to variance (1 + delta_var) level_sd^2.
    double delta_level = 0.0;
    double delta_var = 0.0;
    int effect_minutes = 60;

    std::vector<double> strike_moneyness{0.75, 0.825, 0.9, 0.975, 1.05, 1.125, 1.2, 1.275, 1.35};
    std::vector<int> expiry_days{35, 91, 182, 273, 301}; // calendar days after the quote date
    double half_spread = 0.0005;                      // fraction of price

    std::uint64_t seed = 1;

    /// Throws ConfigError on violated invariants.
    void validate() const;
    SmileParams params_at(double tau) const;
    /// Lagrange weights of the knot maturities at tau.
    std::array<double, 3> knot_weights(double tau) const;
};

struct TrueJump {
    Timestamp timestamp;
    double log_size = 0.0;
};

struct UnderlyingPath {
    PriceSeries series;
    std::vector<TrueJump> jumps;
};

UnderlyingPath gen_underlying(const MarketSpec& spec);

/// Intraday smile factor paths of one session.
struct FactorPath {
    // [knot][session index]
    std::array<std::vector<double>, 3> level, skew, curvature;
};

class SyntheticMarket {
public:
    explicit SyntheticMarket(MarketSpec spec);

    const MarketSpec& spec() const noexcept { return spec_; }
    const PriceSeries& underlying() const noexcept { return path_.series; }
    const std::vector<TrueJump>& true_jumps() const noexcept { return path_.jumps; }
    std::span<const Date> days() const { return path_.series.days(); }
    /// jump_morning if a true jump falls in the morning window, no_jump if the
    /// session has none, excluded otherwise.
    const std::vector<DayGroup>& true_groups() const noexcept { return groups_; }

    FactorPath factors(std::size_t day) const;

    /// Generating IV at session index `idx` of day `day`.
    double iv(std::size_t day, const FactorPath& f, int idx, double m, double tau) const;

    /// All quotes of one session, ordered by (minute, expiry, strike).
    std::vector<OptionQuote> chain_day(std::size_t day) const;

private:
    MarketSpec spec_;
    UnderlyingPath path_;
    std::vector<DayGroup> groups_;
};

/// Chain of every session (memory grows with days x minutes x quotes).
std::vector<OptionQuote> gen_chain(const SyntheticMarket& market);

/// Panel of 10 columns driven by three orthonormal factors with variances
/// 9:3:1 plus isotropic noise carrying `noise_fraction` of the total variance.
struct FactorPanel {
    DeltaIvPanel panel;
    Eigen::MatrixXd loadings; // 10 x 3, orthonormal
    double design_explained = 0.0;
};

FactorPanel gen_factor_panel(std::size_t rows, double noise_fraction, std::uint64_t seed);

} // namespace smilejump
