#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace smilejump {

/// Ranks with ties given the mean of the positions they occupy (1-based).
std::vector<double> midranks(std::span<const double> values);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_sf(double lambda);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t with `df` degrees of freedom (df > 0, not necessarily integer).
double student_t_cdf(double t, double df);

enum class PValueMode {
    asymptotic, // Kolmogorov / Smirnov limits; Student t for Welch-U
    automatic,  // exact KS when n*m <= kKsExactMaxCells; Welch-U enumerated when C(n+m, n) <= 2e6
    exact,      // as automatic, plus Welch-U by random relabeling when enumeration is too large
};

inline constexpr double kKsExactMaxCells = 1e7;

/// Two-sample Kolmogorov-Smirnov. With x = M1 and y = M0:
///   p_two_sided -> H0     (F_x == F_y)
///   p_less      -> H0^s   (alternative F_x < F_y, uses D_minus)
///   p_greater   -> H0^g   (alternative F_x > F_y, uses D_plus)
struct KsResult {
    double d = 0.0;
    double d_plus = 0.0;  // sup (F_x - F_y)
    double d_minus = 0.0; // sup (F_y - F_x)
    double p_two_sided = 1.0;
    double p_greater = 1.0;
    double p_less = 1.0;
    std::size_t n = 0;
    std::size_t m = 0;
    bool small_sample = false; // n or m below 5
    bool exact = false;
};

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y,
                       PValueMode mode = PValueMode::automatic);

/// Welch's t-test on midranks of the merged sample ("Welch-U").
///   p_less    -> H0^s (alternative: mean rank of x below that of y)
///   p_greater -> H0^g (alternative: mean rank of x above that of y)
struct WelchUResult {
    double t_statistic = 0.0;
    double df = 0.0;
    double p_two_sided = 1.0;
    double p_greater = 1.0;
    double p_less = 1.0;
    double rank_mean_x = 0.0;
    double rank_mean_y = 0.0;
    bool degenerate_ties = false; // all ranks tied within both groups
    bool small_sample = false;
    bool exact = false;
};

/// The rank-based Welch statistic and its Satterthwaite df, without p-values.
struct WelchStatistic {
    double t = 0.0;
    double df = 0.0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    bool degenerate = false;
};

WelchStatistic welch_statistic(std::span<const double> rank_x, std::span<const double> rank_y);

/// The permutation distribution of t is enumerated when C(n+m, n) <= 2e6
/// (automatic and exact modes); exact mode otherwise uses 2e5 seeded random
/// relabelings.
WelchUResult welch_u(std::span<const double> x, std::span<const double> y,
                     PValueMode mode = PValueMode::automatic);

} // namespace smilejump
