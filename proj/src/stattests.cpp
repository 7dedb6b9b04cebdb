#include "smilejump/stattests.hpp"

#include "smilejump/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace smilejump {

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // Positions i..j (0-based) share rank ((i+1) + (j+1)) / 2.
        const double r = 0.5 * static_cast<double>(i + j + 2);
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

double kolmogorov_sf(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    if (lambda < 1.18) {
        // Theta-function form converges fast for small lambda.
        const double w = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double cdf = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * w);
            cdf += term;
            if (term < 1e-300 || term < 1e-18 * cdf) break;
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-300 || term < 1e-18 * std::abs(sum)) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

// Continued fraction for I_x(a, b) (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((a - 1.0 + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + 1.0 + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= eps) break;
    }
    return h;
}

// Upper tail P(T >= t).
double student_t_sf(double t, double df) {
    if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
    const double x = df / (df + t * t);
    const double half_tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Log of the number of monotone lattice paths (0,0) -> (n,m) whose every
// point satisfies keep(i*m - j*n); -inf when there is none. Each row is
// rescaled by its maximum so the count never overflows.
template <class Keep>
double log_count_paths(int n, int m, Keep keep) {
    std::vector<double> row(static_cast<std::size_t>(m + 1), 0.0);
    double log_scale = 0.0;
    for (int i = 0; i <= n; ++i) {
        double peak = 0.0;
        for (int j = 0; j <= m; ++j) {
            double v;
            if (i == 0 && j == 0) v = 1.0;
            else v = (i > 0 ? row[static_cast<std::size_t>(j)] : 0.0) +
                     (j > 0 ? row[static_cast<std::size_t>(j - 1)] : 0.0);
            const long long diff = static_cast<long long>(i) * m - static_cast<long long>(j) * n;
            row[static_cast<std::size_t>(j)] = keep(diff) ? v : 0.0;
            peak = std::max(peak, row[static_cast<std::size_t>(j)]);
        }
        if (peak == 0.0) return -std::numeric_limits<double>::infinity();
        for (auto& v : row) v /= peak;
        log_scale += std::log(peak);
    }
    const double last = row[static_cast<std::size_t>(m)];
    return last > 0.0 ? log_scale + std::log(last) : -std::numeric_limits<double>::infinity();
}

double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void require_sample(std::span<const double> v, const char* who) {
    if (v.empty()) throw DomainError(std::string(who) + ": empty sample");
    for (double x : v) {
        if (!std::isfinite(x)) throw DomainError(std::string(who) + ": non-finite value");
    }
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw DomainError("student_t_cdf: df must be positive");
    return 1.0 - student_t_sf(t, df);
}

KsResult ks_two_sample(std::span<const double> x_in, std::span<const double> y_in, PValueMode mode) {
    require_sample(x_in, "ks_two_sample");
    require_sample(y_in, "ks_two_sample");
    std::vector<double> x(x_in.begin(), x_in.end());
    std::vector<double> y(y_in.begin(), y_in.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());

    KsResult r;
    r.n = x.size();
    r.m = y.size();
    r.small_sample = r.n < 5 || r.m < 5;
    const long long n = static_cast<long long>(r.n);
    const long long m = static_cast<long long>(r.m);

    // Right-continuous ECDFs compared after each distinct value; integer
    // differences i*m - j*n keep the sup exact.
    long long best_plus = 0, best_minus = 0;
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        double v;
        if (j >= y.size() || (i < x.size() && x[i] <= y[j])) v = x[i];
        else v = y[j];
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        const long long diff = static_cast<long long>(i) * m - static_cast<long long>(j) * n;
        best_plus = std::max(best_plus, diff);
        best_minus = std::max(best_minus, -diff);
    }
    const double nm = static_cast<double>(n * m);
    r.d_plus = static_cast<double>(best_plus) / nm;
    r.d_minus = static_cast<double>(best_minus) / nm;
    r.d = std::max(r.d_plus, r.d_minus);

    const double ne = nm / static_cast<double>(n + m);
    if (mode != PValueMode::asymptotic && static_cast<double>(n) * static_cast<double>(m) <= kKsExactMaxCells) {
        const auto ni = static_cast<int>(n);
        const auto mi = static_cast<int>(m);
        const double log_total = log_binomial(ni + mi, ni);
        const long long t2 = std::max(best_plus, best_minus);
        // P(statistic >= observed) = 1 - (paths strictly inside the band) / total.
        auto tail = [&](long long t, auto keep_fn) {
            if (t <= 0) return 1.0;
            return std::clamp(-std::expm1(log_count_paths(ni, mi, keep_fn) - log_total), 0.0, 1.0);
        };
        r.p_two_sided = tail(t2, [&](long long d) { return std::llabs(d) < t2; });
        r.p_greater = tail(best_plus, [&](long long d) { return d < best_plus; });
        r.p_less = tail(best_minus, [&](long long d) { return -d < best_minus; });
        r.exact = true;
    } else {
        r.p_two_sided = kolmogorov_sf(std::sqrt(ne) * r.d);
        r.p_greater = std::clamp(std::exp(-2.0 * ne * r.d_plus * r.d_plus), 0.0, 1.0);
        r.p_less = std::clamp(std::exp(-2.0 * ne * r.d_minus * r.d_minus), 0.0, 1.0);
    }
    return r;
}

WelchStatistic welch_statistic(std::span<const double> rx, std::span<const double> ry) {
    WelchStatistic s;
    const double nx = static_cast<double>(rx.size());
    const double ny = static_cast<double>(ry.size());
    s.mean_x = std::accumulate(rx.begin(), rx.end(), 0.0) / nx;
    s.mean_y = std::accumulate(ry.begin(), ry.end(), 0.0) / ny;
    double ssx = 0.0, ssy = 0.0;
    for (double v : rx) ssx += (v - s.mean_x) * (v - s.mean_x);
    for (double v : ry) ssy += (v - s.mean_y) * (v - s.mean_y);
    const double vx = rx.size() > 1 ? ssx / (nx - 1.0) : 0.0;
    const double vy = ry.size() > 1 ? ssy / (ny - 1.0) : 0.0;
    const double ax = vx / nx;
    const double ay = vy / ny;
    const double se2 = ax + ay;
    if (!(se2 > 0.0)) {
        s.degenerate = true;
        return s;
    }
    s.t = (s.mean_x - s.mean_y) / std::sqrt(se2);
    const double denom = (rx.size() > 1 ? ax * ax / (nx - 1.0) : 0.0) +
                         (ry.size() > 1 ? ay * ay / (ny - 1.0) : 0.0);
    s.df = se2 * se2 / denom;
    return s;
}

WelchUResult welch_u(std::span<const double> x_in, std::span<const double> y_in, PValueMode mode) {
    require_sample(x_in, "welch_u");
    require_sample(y_in, "welch_u");
    std::vector<double> x(x_in.begin(), x_in.end());
    std::vector<double> y(y_in.begin(), y_in.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::vector<double> merged = x;
    merged.insert(merged.end(), y.begin(), y.end());
    const std::vector<double> ranks = midranks(merged);
    const std::span<const double> rx(ranks.data(), x.size());
    const std::span<const double> ry(ranks.data() + x.size(), y.size());

    WelchUResult r;
    r.small_sample = x.size() < 5 || y.size() < 5;
    const WelchStatistic s = welch_statistic(rx, ry);
    r.rank_mean_x = s.mean_x;
    r.rank_mean_y = s.mean_y;
    if (s.degenerate) {
        r.degenerate_ties = true;
        return r;
    }
    r.t_statistic = s.t;
    r.df = s.df;

    const bool enumerable = binomial(static_cast<int>(merged.size()), static_cast<int>(x.size())) <= 2e6;
    if (mode == PValueMode::exact || (mode == PValueMode::automatic && enumerable)) {
        const int total_n = static_cast<int>(merged.size());
        const int nx = static_cast<int>(x.size());
        std::size_t ge = 0, le = 0, abs_ge = 0, count = 0;
        const double slack = 1e-12 * (1.0 + std::abs(s.t));
        std::vector<double> gx(static_cast<std::size_t>(nx));
        std::vector<double> gy(static_cast<std::size_t>(total_n - nx));
        auto tally = [&](const std::vector<int>& pick) {
            std::size_t a = 0, b = 0;
            for (int idx = 0; idx < total_n; ++idx) {
                if (pick[static_cast<std::size_t>(idx)]) gx[a++] = ranks[static_cast<std::size_t>(idx)];
                else gy[b++] = ranks[static_cast<std::size_t>(idx)];
            }
            const WelchStatistic p = welch_statistic(gx, gy);
            const double t = p.degenerate ? 0.0 : p.t;
            ++count;
            if (t >= s.t - slack) ++ge;
            if (t <= s.t + slack) ++le;
            if (std::abs(t) >= std::abs(s.t) - slack) ++abs_ge;
        };
        std::vector<int> pick(static_cast<std::size_t>(total_n), 0);
        if (enumerable) {
            std::fill(pick.begin(), pick.begin() + nx, 1);
            std::sort(pick.begin(), pick.end());
            do {
                tally(pick);
            } while (std::next_permutation(pick.begin(), pick.end()));
            r.exact = true;
        } else {
            std::mt19937_64 rng(0xC0FFEEULL + static_cast<std::uint64_t>(total_n));
            std::fill(pick.begin(), pick.begin() + nx, 1);
            for (int rep = 0; rep < 200000; ++rep) {
                std::shuffle(pick.begin(), pick.end(), rng);
                tally(pick);
            }
        }
        const double c = static_cast<double>(count);
        r.p_greater = static_cast<double>(ge) / c;
        r.p_less = static_cast<double>(le) / c;
        r.p_two_sided = static_cast<double>(abs_ge) / c;
    } else {
        r.p_greater = student_t_sf(s.t, s.df);
        r.p_less = student_t_sf(-s.t, s.df);
        r.p_two_sided = std::min(1.0, 2.0 * std::min(r.p_greater, r.p_less));
    }
    return r;
}

} // namespace smilejump
