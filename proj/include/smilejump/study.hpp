#pragma once

#include "smilejump/jumps.hpp"
#include "smilejump/smilepca.hpp"
#include "smilejump/stattests.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace smilejump {

struct DayScoreSummary {
    Date day{};
    DayGroup group = DayGroup::excluded;
    int pc = 1; // 1-based
    double tau = 0.0;
    double mu = 0.0; // mean of the day's first-hour scores
    double nu = 0.0; // unbiased variance of the same
    int minutes = 0;
};

struct SummaryOptions {
    int min_minutes = 45;
    MorningWindow window{};
};

struct SummaryResult {
    std::vector<DayScoreSummary> summaries;
    std::vector<Date> insufficient_days; // grouped days with too few first-hour scores
};

/// One summary per (qualifying grouped day, PC) at the panel's maturity.
SummaryResult day_summaries(const ScorePanel& scores, const DayPartition& partition,
                            const SummaryOptions& opts = {});

/// Empirical quantile with linear interpolation between order statistics
/// (position (n-1)p on the sorted sample).
double empirical_quantile(std::span<const double> sorted, double p);

struct TrimmedSample {
    std::vector<double> values; // retained, in input order
    double lo_bound = 0.0;
    double hi_bound = 0.0;
    std::size_t before = 0;
    std::size_t after = 0;
    bool skipped = false; // fewer than min_count values: nothing removed
};

/// Keeps {v : q_lo <= v <= q_hi}.
TrimmedSample trim(std::span<const double> values, double lo = 0.02, double hi = 0.98,
                   std::size_t min_count = 50);

struct StudyConfig {
    double trim_lo = 0.02;
    double trim_hi = 0.98;
    std::size_t min_trim_count = 50;
    double level = 0.05; // significance level of the summary grid
    PValueMode mode = PValueMode::automatic;
};

/// p-values of (H0, H0^s, H0^g).
struct HypothesisTriple {
    double h0 = 1.0;
    double h0s = 1.0;
    double h0g = 1.0;
};

enum class Effect { higher, lower, none, insufficient };

/// One statistic (M or Sigma) for one (maturity, PC).
struct SampleCell {
    bool sufficient = false;
    std::size_t n_jump_raw = 0;
    std::size_t n_nojump_raw = 0;
    std::size_t n_jump = 0; // after trimming
    std::size_t n_nojump = 0;
    KsResult ks;
    WelchUResult welch;
    HypothesisTriple ks_p;
    HypothesisTriple welch_p;
    char ks_symbol = '=';
    char welch_symbol = '=';
};

struct ComponentInfo {
    double tau = 0.0;
    int pc = 1;
    int sign = 1;
    SmileRegion region = SmileRegion::atm;
};

struct ComponentReport {
    ComponentInfo info;
    SampleCell mean; // M_j
    SampleCell var;  // Sigma_j
};

struct TestReport {
    double level = 0.05;
    std::vector<double> taus;
    std::vector<ComponentReport> components; // ordered by (tau, pc)
    std::size_t jump_days = 0;
    std::size_t nojump_days = 0;
    std::size_t excluded_days = 0;
    std::vector<std::size_t> insufficient_days; // per tau

    const ComponentReport* find(double tau, int pc) const;
    /// True when every sufficient cell of the grid is '='.
    bool all_neutral() const;
};

/// Direction of x (= jump days) relative to y from a KS or Welch-U triple.
Effect ks_effect(const HypothesisTriple& p, double level);
Effect welch_effect(const HypothesisTriple& p, double level);

/// '+' when jump days show higher changes in IV, '-' for lower, '=' otherwise;
/// the loading sign flips the direction.
char effect_symbol(Effect effect, int sign);

TestReport run_study(std::span<const DayScoreSummary> summaries, std::span<const ComponentInfo> components,
                     const StudyConfig& cfg = {});

std::string maturity_label(double tau);

/// CSV mirroring the KS / Welch-U p-value tables (see README for the layout).
std::string report_csv(const TestReport& report);
std::string report_json(const TestReport& report);

} // namespace smilejump
