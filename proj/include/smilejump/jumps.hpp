#pragma once

#include "smilejump/calendar.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace smilejump {

/// Minute-level underlying prices, grouped by session.
class PriceSeries {
public:
    PriceSeries() = default;

    /// Validates: strictly increasing timestamps, positive finite prices.
    PriceSeries(std::vector<Timestamp> timestamps, std::vector<double> prices);

    std::span<const Timestamp> timestamps() const { return timestamps_; }
    std::span<const double> prices() const { return prices_; }
    std::vector<double> log_prices() const;

    std::size_t day_count() const { return days_.size(); }
    std::span<const Date> days() const { return days_; }
    /// Index range [begin, end) of day d in the minute arrays.
    std::size_t day_begin(std::size_t d) const { return offsets_[d]; }
    std::size_t day_end(std::size_t d) const { return offsets_[d + 1]; }

    PriceSeries scaled(double factor) const;

private:
    std::vector<Timestamp> timestamps_;
    std::vector<double> prices_;
    std::vector<Date> days_;
    std::vector<std::size_t> offsets_{0};
};

/// Intraday log returns at a fixed sampling interval. Overnight returns are
/// never formed; `day_offsets` delimits each session's returns.
struct ReturnSeries {
    int sampling_minutes = 1;
    std::vector<double> values;
    std::vector<Timestamp> end_times;
    std::vector<Date> days;
    std::vector<std::size_t> day_offsets{0};
};

/// Samples session minute indices 0, s, 2s, ... and differences log prices
/// within each session. Throws InsufficientData if fewer than `min_returns`
/// returns result.
ReturnSeries log_returns(const PriceSeries& series, int sampling_minutes, std::size_t min_returns = 0);

enum class ThresholdCalibration {
    gumbel,    // asymptotic Gumbel constants for the maximum of n statistics
    simulated, // finite-sample quantile of the daily maximum under a Gaussian null
};

struct JumpTest {
    double alpha = 0.01;
    int window_k = 270;
    int sampling_minutes = 5;
    ThresholdCalibration calibration = ThresholdCalibration::simulated;

    /// Defaults for a sampling interval: K = 270 at 5 minutes, 156 at 15.
    static JumpTest for_sampling(int minutes, double alpha = 0.01);
    void validate() const;
};

struct BipowerEstimate {
    double sigma = 0.0;
    bool degenerate = false; // every adjacent product in the window was zero
};

/// Local volatility from the K-2 adjacent absolute-return products preceding
/// return i (return i itself excluded). Requires i >= window_k.
BipowerEstimate bipower_sigma(std::span<const double> returns, std::size_t i, int window_k);

struct LmValue {
    double statistic = 0.0;
    bool zero_vol_anomaly = false; // sigma was 0 but the return was not
};

/// L(i) = r_i / sigma_i. For a zero local sigma, L = 0 when r_i = 0 and
/// +/-infinity with the anomaly flag otherwise.
LmValue lm_statistic(std::span<const double> returns, std::size_t i, int window_k);

/// Gumbel threshold beta* = -log(-log(1 - alpha)) * S_n + C_n.
double threshold(double n, double alpha);

/// (1 - alpha) quantile of max |L| over n returns for an i.i.d. Gaussian null,
/// estimated from `sim_days` simulated sessions with a fixed seed. Cached.
double simulated_threshold(int n, int window_k, double alpha, int sim_days = 200000);

struct JumpEvent {
    Timestamp timestamp;
    double statistic = 0.0;
    double beta_star = 0.0;
    double log_return = 0.0;
    double local_sigma = 0.0;
    int direction = 0;
    bool zero_vol_anomaly = false;
};

struct DayCoverage {
    Date day{};
    bool testable = false; // every return of the day had a full window
};

struct JumpScan {
    JumpTest test;
    int returns_per_day = 0;
    double beta_star = 0.0;
    std::vector<JumpEvent> events;
    std::vector<DayCoverage> coverage;
};

/// Full scan: events, threshold, and which sessions could be tested.
JumpScan scan_jumps(const PriceSeries& series, const JumpTest& test);

/// Indices with |L| > beta*, in time order.
std::vector<JumpEvent> detect_jumps(const PriceSeries& series, const JumpTest& test);

enum class DayGroup { jump_morning, no_jump, excluded };

const char* to_string(DayGroup g);

struct DayPartition {
    std::vector<Date> days;
    std::vector<DayGroup> groups;
    std::vector<int> morning_events; // primary-sampling events in the morning window

    std::size_t count(DayGroup g) const;
    DayGroup group_of(Date d) const;
};

struct MorningWindow {
    int first_minute = kMorningFirst;
    int last_minute = kMorningLast;
};

/// scans[0] is the primary sampling. A day is a jump morning if the primary
/// scan has an event inside the window, a no-jump day if no scan has any
/// event that day and every scan could test it, and excluded otherwise.
DayPartition classify_mornings(std::span<const JumpScan> scans, MorningWindow window = {});

} // namespace smilejump
