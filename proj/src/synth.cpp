#include "smilejump/synth.hpp"

#include "smilejump/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace smilejump {

namespace {

// Independent stream per (purpose, index) so days can be generated in any order.
std::mt19937_64 stream(std::uint64_t seed, std::uint32_t purpose, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose,
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

enum : std::uint32_t { kScheduleStream = 1, kPriceStream = 2, kSmileStream = 3, kPanelStream = 4 };

double strike_for(double m, double spot) {
    double k = m * spot;
    for (int i = 0; i < 8 && k / spot != m; ++i) {
        k = std::nextafter(k, k / spot < m ? INFINITY : -INFINITY);
    }
    return k;
}

// Quoted spot within a few ulps of the path price for which every K / S
// reproduces its moneyness exactly. Equal locations across minutes let the
// surface kernel reuse its factorization; some spots admit no such strike
// for a given m, hence the search.
double quote_spot(double spot, const std::vector<double>& moneyness) {
    auto exact = [&](double s) {
        return std::all_of(moneyness.begin(), moneyness.end(),
                           [&](double m) { return strike_for(m, s) / s == m; });
    };
    double up = spot, down = spot;
    for (int i = 0; i < 256; ++i) {
        if (exact(up)) return up;
        if (exact(down)) return down;
        up = std::nextafter(up, INFINITY);
        down = std::nextafter(down, 0.0);
    }
    return spot;
}

} // namespace

void MarketSpec::validate() const {
    if (days <= 0) throw ConfigError("MarketSpec: days must be positive");
    if (minutes_per_day != kMinutesPerDay) throw ConfigError("MarketSpec: minutes_per_day must be 405");
    if (!(annual_vol >= 0.0) || !std::isfinite(annual_vol)) throw ConfigError("MarketSpec: annual_vol must be >= 0");
    if (!(spot0 > 0.0)) throw ConfigError("MarketSpec: spot0 must be positive");
    if (!(jump_intensity >= 0.0)) throw ConfigError("MarketSpec: jump_intensity must be >= 0");
    if (!(jump_sd >= 0.0)) throw ConfigError("MarketSpec: jump_sd must be >= 0");
    if (forced_morning_jump_days > days - jump_free_days) {
        throw ConfigError("MarketSpec: more forced jump days than eligible days");
    }
    if (forced_jump_last_index < 1 || forced_jump_last_index >= minutes_per_day) {
        throw ConfigError("MarketSpec: forced_jump_last_index out of range");
    }
    if (!(level_sd >= 0.0 && skew_sd >= 0.0 && curvature_sd >= 0.0)) {
        throw ConfigError("MarketSpec: factor sds must be >= 0");
    }
    if (!(knot_correlation >= 0.0 && knot_correlation <= 1.0)) {
        throw ConfigError("MarketSpec: knot_correlation must be in [0,1]");
    }
    if (!(delta_var > -1.0)) throw ConfigError("MarketSpec: delta_var must exceed -1");
    if (strike_moneyness.empty() || expiry_days.empty()) throw ConfigError("MarketSpec: empty chain layout");
    for (int e : expiry_days) {
        if (e <= 0) throw ConfigError("MarketSpec: expiry offsets must be positive");
    }
    if (!(half_spread >= 0.0 && half_spread < 1.0)) throw ConfigError("MarketSpec: half_spread out of range");
}

std::array<double, 3> MarketSpec::knot_weights(double tau) const {
    std::array<double, 3> w{1.0, 1.0, 1.0};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            if (j != i) w[i] *= (tau - knot_taus[j]) / (knot_taus[i] - knot_taus[j]);
        }
    }
    return w;
}

SmileParams MarketSpec::params_at(double tau) const {
    const auto w = knot_weights(tau);
    SmileParams p{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 3; ++i) {
        p.a += w[i] * smile[i].a;
        p.b += w[i] * smile[i].b;
        p.c += w[i] * smile[i].c;
    }
    return p;
}

UnderlyingPath gen_underlying(const MarketSpec& spec) {
    spec.validate();
    const auto days = trading_days(spec.first_day, spec.days);
    const auto n_days = static_cast<std::size_t>(spec.days);

    std::vector<int> forced(n_days, -1);
    if (spec.forced_morning_jump_days >= 0) {
        auto rng = stream(spec.seed, kScheduleStream, 0);
        std::vector<std::size_t> eligible(n_days - static_cast<std::size_t>(spec.jump_free_days));
        std::iota(eligible.begin(), eligible.end(), static_cast<std::size_t>(spec.jump_free_days));
        std::shuffle(eligible.begin(), eligible.end(), rng);
        std::uniform_int_distribution<int> at(1, spec.forced_jump_last_index);
        std::vector<std::size_t> chosen(eligible.begin(), eligible.begin() + spec.forced_morning_jump_days);
        std::sort(chosen.begin(), chosen.end());
        for (auto d : chosen) forced[d] = at(rng);
    }

    const double step_sd = spec.annual_vol / std::sqrt(252.0 * spec.minutes_per_day);
    std::vector<Timestamp> ts;
    std::vector<double> prices;
    ts.reserve(n_days * kMinutesPerDay);
    prices.reserve(n_days * kMinutesPerDay);
    std::vector<TrueJump> jumps;
    double log_s = 0.0; // log(S / spot0)

    for (std::size_t d = 0; d < n_days; ++d) {
        auto rng = stream(spec.seed, kPriceStream, d);
        std::normal_distribution<double> z;
        std::vector<double> jump_at(kMinutesPerDay, 0.0);
        auto draw_size = [&] {
            double s = spec.jump_mean + spec.jump_sd * z(rng);
            if (spec.random_jump_sign && std::bernoulli_distribution(0.5)(rng)) s = -s;
            return s;
        };
        if (forced[d] > 0) jump_at[static_cast<std::size_t>(forced[d])] += draw_size();
        if (spec.jump_intensity > 0.0 && (spec.jump_free_days <= static_cast<int>(d))) {
            const int count = std::poisson_distribution<int>(spec.jump_intensity)(rng);
            std::uniform_int_distribution<int> at(1, kMinutesPerDay - 1);
            for (int j = 0; j < count; ++j) {
                const int idx = at(rng);
                jump_at[static_cast<std::size_t>(idx)] += draw_size();
            }
        }
        for (int i = 0; i < kMinutesPerDay; ++i) {
            // The first increment of a session links it to the previous close.
            if (d > 0 || i > 0) log_s += step_sd * z(rng);
            const double j = jump_at[static_cast<std::size_t>(i)];
            if (j != 0.0) {
                log_s += j;
                jumps.push_back({session_minute(days[d], i), j});
            }
            ts.push_back(session_minute(days[d], i));
            prices.push_back(spec.spot0 * std::exp(log_s));
        }
    }
    return {PriceSeries(std::move(ts), std::move(prices)), std::move(jumps)};
}

SyntheticMarket::SyntheticMarket(MarketSpec spec) : spec_(std::move(spec)), path_(gen_underlying(spec_)) {
    const auto days = path_.series.days();
    std::vector<int> morning(days.size(), 0), any(days.size(), 0);
    std::size_t d = 0;
    for (const auto& j : path_.jumps) {
        while (days[d] != j.timestamp.day) ++d;
        ++any[d];
        if (j.timestamp.minute >= kMorningFirst && j.timestamp.minute <= kMorningLast) ++morning[d];
    }
    groups_.resize(days.size());
    for (std::size_t i = 0; i < days.size(); ++i) {
        groups_[i] = morning[i] > 0 ? DayGroup::jump_morning : any[i] == 0 ? DayGroup::no_jump : DayGroup::excluded;
    }
}

FactorPath SyntheticMarket::factors(std::size_t day) const {
    auto rng = stream(spec_.seed, kSmileStream, day);
    std::normal_distribution<double> z;
    FactorPath f;
    for (std::size_t k = 0; k < 3; ++k) {
        f.level[k].assign(kMinutesPerDay, 0.0);
        f.skew[k].assign(kMinutesPerDay, 0.0);
        f.curvature[k].assign(kMinutesPerDay, 0.0);
    }
    const bool effect_day = groups_[day] == DayGroup::jump_morning;
    const double effect_sd = spec_.level_sd * std::sqrt(1.0 + spec_.delta_var);
    const double common = std::sqrt(spec_.knot_correlation);
    const double own = std::sqrt(1.0 - spec_.knot_correlation);
    // Unit increments of one factor at the three knots.
    auto draw = [&] {
        const double c = z(rng);
        std::array<double, 3> e{};
        for (auto& v : e) v = common * c + own * z(rng);
        return e;
    };
    for (int i = 1; i < kMinutesPerDay; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const bool effect = effect_day && i <= spec_.effect_minutes;
        const auto el = draw(), es = draw(), ec = draw();
        for (std::size_t k = 0; k < 3; ++k) {
            const double dl = effect ? spec_.delta_level + effect_sd * el[k] : spec_.level_sd * el[k];
            f.level[k][u] = f.level[k][u - 1] + dl;
            f.skew[k][u] = f.skew[k][u - 1] + spec_.skew_sd * es[k];
            f.curvature[k][u] = f.curvature[k][u - 1] + spec_.curvature_sd * ec[k];
        }
    }
    return f;
}

double SyntheticMarket::iv(std::size_t, const FactorPath& f, int idx, double m, double tau) const {
    const auto u = static_cast<std::size_t>(idx);
    const auto w = spec_.knot_weights(tau);
    SmileParams p = spec_.params_at(tau);
    for (std::size_t k = 0; k < 3; ++k) {
        p.a += w[k] * f.level[k][u];
        p.b += w[k] * f.skew[k][u];
        p.c += w[k] * f.curvature[k][u];
    }
    const double x = m - 1.0;
    return p.a + p.b * x + p.c * x * x;
}

std::vector<OptionQuote> SyntheticMarket::chain_day(std::size_t day) const {
    const FactorPath f = factors(day);
    const Date date = path_.series.days()[day];
    const auto prices = path_.series.prices();
    const std::size_t begin = path_.series.day_begin(day);

    std::vector<OptionQuote> out;
    out.reserve(kMinutesPerDay * spec_.expiry_days.size() * spec_.strike_moneyness.size());
    for (int i = 0; i < kMinutesPerDay; ++i) {
        const double spot = quote_spot(prices[begin + static_cast<std::size_t>(i)], spec_.strike_moneyness);
        const Timestamp ts = session_minute(date, i);
        for (int e : spec_.expiry_days) {
            const double tau = e / 365.0;
            for (double m : spec_.strike_moneyness) {
                const double strike = strike_for(m, spot);
                const OptionRight right = otm_right(spot, strike);
                const double sigma = iv(day, f, i, strike / spot, tau);
                if (!(sigma > 0.0)) throw DomainError("synth: generating IV is not positive");
                const double price = bs_price({spot, strike, spec_.rate, tau, sigma, right});
                OptionQuote q;
                q.timestamp = ts;
                q.expiry = date + std::chrono::days{e};
                q.strike = strike;
                q.right = right;
                q.bid = price * (1.0 - spec_.half_spread);
                q.ask = price * (1.0 + spec_.half_spread);
                q.spot = spot;
                out.push_back(q);
            }
        }
    }
    return out;
}

std::vector<OptionQuote> gen_chain(const SyntheticMarket& market) {
    std::vector<OptionQuote> all;
    for (std::size_t d = 0; d < market.underlying().day_count(); ++d) {
        auto day = market.chain_day(d);
        all.insert(all.end(), day.begin(), day.end());
    }
    return all;
}

FactorPanel gen_factor_panel(std::size_t rows, double noise_fraction, std::uint64_t seed) {
    if (!(noise_fraction >= 0.0 && noise_fraction < 1.0)) throw ConfigError("gen_factor_panel: noise_fraction in [0,1)");
    const MoneynessGrid grid;
    Eigen::MatrixXd raw(kBinCount, 3);
    for (std::size_t k = 0; k < kBinCount; ++k) {
        const double x = grid.center(k) - 1.05;
        raw(static_cast<Eigen::Index>(k), 0) = 1.0;
        raw(static_cast<Eigen::Index>(k), 1) = x;
        raw(static_cast<Eigen::Index>(k), 2) = x * x;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    FactorPanel out;
    out.loadings = qr.householderQ() * Eigen::MatrixXd::Identity(kBinCount, 3);

    const std::array<double, 3> var{9.0, 3.0, 1.0};
    const double signal = 13.0;
    const double noise_var = signal * noise_fraction / (static_cast<double>(kBinCount) * (1.0 - noise_fraction));
    out.design_explained = (signal + 3.0 * noise_var) / (signal + static_cast<double>(kBinCount) * noise_var);

    auto rng = stream(seed, kPanelStream, 0);
    std::normal_distribution<double> z;
    const auto n = static_cast<Eigen::Index>(rows);
    out.panel.values.resize(n, kBinCount);
    out.panel.rows.resize(rows);
    const auto days = trading_days(Date{std::chrono::year{2006} / 1 / 3}, static_cast<int>(rows / (kMinutesPerDay - 1) + 1));
    for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::Vector3d f;
        for (int j = 0; j < 3; ++j) f(j) = std::sqrt(var[static_cast<std::size_t>(j)]) * z(rng);
        for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(kBinCount); ++c) {
            out.panel.values(r, c) = out.loadings.row(c).dot(f) + std::sqrt(noise_var) * z(rng);
        }
        const auto u = static_cast<std::size_t>(r);
        out.panel.rows[u] = session_minute(days[u / (kMinutesPerDay - 1)], static_cast<int>(u % (kMinutesPerDay - 1)) + 1);
    }
    return out;
}

} // namespace smilejump
