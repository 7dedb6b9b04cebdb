#include "smilejump/jumps.hpp"

#include "smilejump/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

namespace smilejump {

PriceSeries::PriceSeries(std::vector<Timestamp> timestamps, std::vector<double> prices)
    : timestamps_(std::move(timestamps)), prices_(std::move(prices)) {
    if (timestamps_.size() != prices_.size()) {
        throw DomainError("PriceSeries: timestamp and price counts differ");
    }
    for (std::size_t i = 0; i < prices_.size(); ++i) {
        if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i])) {
            throw DomainError("PriceSeries: prices must be positive and finite");
        }
        if (i > 0 && !(timestamps_[i - 1] < timestamps_[i])) {
            throw DomainError("PriceSeries: timestamps must be strictly increasing");
        }
        if (i == 0 || timestamps_[i].day != timestamps_[i - 1].day) {
            if (i > 0) offsets_.push_back(i);
            days_.push_back(timestamps_[i].day);
        }
    }
    if (!prices_.empty()) offsets_.push_back(prices_.size());
}

std::vector<double> PriceSeries::log_prices() const {
    std::vector<double> out(prices_.size());
    std::transform(prices_.begin(), prices_.end(), out.begin(), [](double p) { return std::log(p); });
    return out;
}

PriceSeries PriceSeries::scaled(double factor) const {
    std::vector<double> p = prices_;
    for (auto& v : p) v *= factor;
    return PriceSeries(timestamps_, std::move(p));
}

ReturnSeries log_returns(const PriceSeries& series, int sampling_minutes, std::size_t min_returns) {
    if (sampling_minutes < 1) throw DomainError("log_returns: sampling must be >= 1 minute");
    ReturnSeries out;
    out.sampling_minutes = sampling_minutes;
    const auto ts = series.timestamps();
    const auto px = series.prices();
    for (std::size_t d = 0; d < series.day_count(); ++d) {
        double prev = 0.0;
        bool have_prev = false;
        int prev_index = 0;
        for (std::size_t i = series.day_begin(d); i < series.day_end(d); ++i) {
            const int idx = ts[i].session_index();
            if (idx < 0 || idx % sampling_minutes != 0) continue;
            if (have_prev && idx == prev_index + sampling_minutes) {
                out.values.push_back(std::log(px[i] / prev));
                out.end_times.push_back(ts[i]);
            }
            prev = px[i];
            prev_index = idx;
            have_prev = true;
        }
        out.days.push_back(series.days()[d]);
        out.day_offsets.push_back(out.values.size());
    }
    if (out.values.size() < min_returns) {
        throw InsufficientData("log_returns: " + std::to_string(out.values.size()) +
                               " returns, need " + std::to_string(min_returns));
    }
    return out;
}

JumpTest JumpTest::for_sampling(int minutes, double alpha) {
    JumpTest t;
    t.alpha = alpha;
    t.sampling_minutes = minutes;
    t.window_k = minutes >= 15 ? 156 : 270;
    return t;
}

void JumpTest::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("jump test: alpha must be in (0,1)");
    if (window_k < 3) throw ConfigError("jump test: window K must be >= 3");
    if (sampling_minutes < 1) throw ConfigError("jump test: sampling must be >= 1 minute");
}

BipowerEstimate bipower_sigma(std::span<const double> returns, std::size_t i, int window_k) {
    const auto k = static_cast<std::size_t>(window_k);
    if (window_k < 3 || i < k || i >= returns.size()) {
        throw DomainError("bipower_sigma: index needs a full preceding window");
    }
    double sum = 0.0;
    for (std::size_t j = i - k + 2; j <= i - 1; ++j) {
        sum += std::abs(returns[j]) * std::abs(returns[j - 1]);
    }
    const double var = sum / static_cast<double>(k - 2);
    return {std::sqrt(var), sum == 0.0};
}

LmValue lm_statistic(std::span<const double> returns, std::size_t i, int window_k) {
    const BipowerEstimate est = bipower_sigma(returns, i, window_k);
    const double r = returns[i];
    if (est.sigma == 0.0) {
        if (r == 0.0) return {0.0, false};
        return {std::copysign(std::numeric_limits<double>::infinity(), r), true};
    }
    return {r / est.sigma, false};
}

double threshold(double n, double alpha) {
    if (!(n >= 10.0)) throw DomainError("threshold: n must be >= 10");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("threshold: alpha must be in (0,1)");
    const double c = std::sqrt(2.0 / std::numbers::pi);
    const double log_n = std::log(n);
    const double root = std::sqrt(2.0 * log_n);
    const double cn = root / c - (std::log(std::numbers::pi) + std::log(log_n)) / (2.0 * c * root);
    const double sn = 1.0 / (c * root);
    const double gumbel_quantile = -std::log(-std::log(1.0 - alpha));
    return gumbel_quantile * sn + cn;
}

double simulated_threshold(int n, int window_k, double alpha, int sim_days) {
    if (n < 1 || window_k < 3 || sim_days < 100) throw DomainError("simulated_threshold: bad arguments");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("simulated_threshold: alpha must be in (0,1)");

    static std::mutex mutex;
    static std::map<std::tuple<int, int, double, int>, double> cache;
    const auto key = std::make_tuple(n, window_k, alpha, sim_days);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    // L is scale-free, so unit-variance returns represent every constant-vol null.
    std::mt19937_64 rng(0x5eed1e55ULL + static_cast<std::uint64_t>(n) * 1000003ULL +
                        static_cast<std::uint64_t>(window_k));
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto k = static_cast<std::size_t>(window_k);
    const std::size_t total = k + static_cast<std::size_t>(n) * static_cast<std::size_t>(sim_days);
    std::vector<double> abs_r(total);
    std::vector<double> r(total);
    for (std::size_t i = 0; i < total; ++i) {
        r[i] = normal(rng);
        abs_r[i] = std::abs(r[i]);
    }
    // prefix[j] = sum_{t=1}^{j} |r_t||r_{t-1}|, accumulated in long double.
    std::vector<long double> prefix(total, 0.0L);
    for (std::size_t j = 1; j < total; ++j) {
        prefix[j] = prefix[j - 1] + static_cast<long double>(abs_r[j]) * abs_r[j - 1];
    }
    std::vector<double> maxima(static_cast<std::size_t>(sim_days));
    for (std::size_t d = 0; d < maxima.size(); ++d) {
        double best = 0.0;
        for (int t = 0; t < n; ++t) {
            const std::size_t i = k + d * static_cast<std::size_t>(n) + static_cast<std::size_t>(t);
            const long double sum = prefix[i - 1] - prefix[i - k + 1];
            const double sigma = std::sqrt(static_cast<double>(sum) / static_cast<double>(k - 2));
            best = std::max(best, abs_r[i] / sigma);
        }
        maxima[d] = best;
    }
    std::sort(maxima.begin(), maxima.end());
    const double h = (static_cast<double>(maxima.size()) - 1.0) * (1.0 - alpha);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, maxima.size() - 1);
    const double q = maxima[lo] + (h - static_cast<double>(lo)) * (maxima[hi] - maxima[lo]);

    std::lock_guard lock(mutex);
    cache.emplace(key, q);
    return q;
}

JumpScan scan_jumps(const PriceSeries& series, const JumpTest& test) {
    test.validate();
    const auto k = static_cast<std::size_t>(test.window_k);
    const ReturnSeries rs = log_returns(series, test.sampling_minutes, 1);

    JumpScan scan;
    scan.test = test;
    scan.returns_per_day = (kMinutesPerDay - 1) / test.sampling_minutes;
    scan.beta_star = test.calibration == ThresholdCalibration::gumbel
                         ? threshold(std::max(scan.returns_per_day, 10), test.alpha)
                         : simulated_threshold(scan.returns_per_day, test.window_k, test.alpha);

    for (std::size_t d = 0; d < rs.days.size(); ++d) {
        const std::size_t begin = rs.day_offsets[d];
        const std::size_t end = rs.day_offsets[d + 1];
        scan.coverage.push_back({rs.days[d], begin >= k && end > begin});
        for (std::size_t i = std::max(begin, k); i < end; ++i) {
            const LmValue lm = lm_statistic(rs.values, i, test.window_k);
            if (std::abs(lm.statistic) > scan.beta_star || lm.zero_vol_anomaly) {
                JumpEvent ev;
                ev.timestamp = rs.end_times[i];
                ev.statistic = lm.statistic;
                ev.beta_star = scan.beta_star;
                ev.log_return = rs.values[i];
                ev.local_sigma = bipower_sigma(rs.values, i, test.window_k).sigma;
                ev.direction = rs.values[i] > 0.0 ? 1 : (rs.values[i] < 0.0 ? -1 : 0);
                ev.zero_vol_anomaly = lm.zero_vol_anomaly;
                scan.events.push_back(ev);
            }
        }
    }
    return scan;
}

std::vector<JumpEvent> detect_jumps(const PriceSeries& series, const JumpTest& test) {
    return scan_jumps(series, test).events;
}

const char* to_string(DayGroup g) {
    switch (g) {
    case DayGroup::jump_morning: return "jump";
    case DayGroup::no_jump: return "nojump";
    case DayGroup::excluded: return "excluded";
    }
    return "excluded";
}

std::size_t DayPartition::count(DayGroup g) const {
    return static_cast<std::size_t>(std::count(groups.begin(), groups.end(), g));
}

DayGroup DayPartition::group_of(Date d) const {
    const auto it = std::lower_bound(days.begin(), days.end(), d);
    if (it == days.end() || *it != d) return DayGroup::excluded;
    return groups[static_cast<std::size_t>(it - days.begin())];
}

DayPartition classify_mornings(std::span<const JumpScan> scans, MorningWindow window) {
    DayPartition out;
    if (scans.empty()) return out;

    struct DayState {
        int morning = 0;
        int any = 0;
        int tested_by = 0;
        bool in_primary = false;
    };
    std::map<Date, DayState> state;
    for (std::size_t s = 0; s < scans.size(); ++s) {
        for (const auto& cov : scans[s].coverage) {
            auto& st = state[cov.day];
            if (s == 0) st.in_primary = true;
            if (cov.testable) ++st.tested_by;
        }
        for (const auto& ev : scans[s].events) {
            auto& st = state[ev.timestamp.day];
            ++st.any;
            if (s == 0 && ev.timestamp.minute >= window.first_minute &&
                ev.timestamp.minute <= window.last_minute) {
                ++st.morning;
            }
        }
    }
    for (const auto& [day, st] : state) {
        if (!st.in_primary) continue;
        DayGroup g = DayGroup::excluded;
        if (st.morning > 0) {
            g = DayGroup::jump_morning;
        } else if (st.any == 0 && st.tested_by == static_cast<int>(scans.size())) {
            g = DayGroup::no_jump;
        }
        out.days.push_back(day);
        out.groups.push_back(g);
        out.morning_events.push_back(st.morning);
    }
    return out;
}

} // namespace smilejump
