#include "smilejump/pricing.hpp"

#include "smilejump/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace smilejump {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

void check_inputs(const PricingInputs& in) {
    const bool finite = std::isfinite(in.spot) && std::isfinite(in.strike) &&
                        std::isfinite(in.rate) && std::isfinite(in.tau) &&
                        std::isfinite(in.sigma);
    if (!finite) throw DomainError("bs_price: non-finite input");
    if (!(in.spot > 0.0) || !(in.strike > 0.0) || !(in.tau > 0.0) || !(in.sigma > 0.0)) {
        throw DomainError("bs_price: spot, strike, tau and sigma must be positive");
    }
}

struct D12 {
    double d1;
    double d2;
};

D12 d_terms(const PricingInputs& in) {
    const double vol_sqrt_t = in.sigma * std::sqrt(in.tau);
    const double d1 =
        (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.sigma * in.sigma) * in.tau) /
        vol_sqrt_t;
    return {d1, d1 - vol_sqrt_t};
}

double price_unchecked(const PricingInputs& in) {
    const auto [d1, d2] = d_terms(in);
    const double df_strike = in.strike * std::exp(-in.rate * in.tau);
    if (in.right == OptionRight::call) {
        return in.spot * norm_cdf(d1) - df_strike * norm_cdf(d2);
    }
    return df_strike * norm_cdf(-d2) - in.spot * norm_cdf(-d1);
}

double vega_unchecked(const PricingInputs& in) {
    const auto [d1, d2] = d_terms(in);
    (void)d2;
    return in.spot * std::sqrt(in.tau) * norm_pdf(d1);
}

} // namespace

double bs_price(const PricingInputs& in) {
    check_inputs(in);
    const PriceBounds b = price_bounds(in.spot, in.strike, in.rate, in.tau, in.right);
    // Rounding in the two-term formula can leave the result a few ulps outside.
    return std::clamp(price_unchecked(in), b.lower, b.upper);
}

double bs_vega(const PricingInputs& in) {
    check_inputs(in);
    return vega_unchecked(in);
}

PriceBounds price_bounds(double spot, double strike, double rate, double tau, OptionRight right) {
    const double df_strike = strike * std::exp(-rate * tau);
    if (right == OptionRight::call) {
        return {std::max(spot - df_strike, 0.0), spot};
    }
    return {std::max(df_strike - spot, 0.0), df_strike};
}

ImpliedVol implied_vol(double target_price, double spot, double strike, double rate, double tau,
                       OptionRight right, const IvSolverOptions& opts) {
    if (!std::isfinite(target_price)) throw DomainError("implied_vol: non-finite target");
    PricingInputs in{spot, strike, rate, tau, opts.sigma_lo, right};
    check_inputs(in);

    const PriceBounds bounds = price_bounds(spot, strike, rate, tau, right);
    if (!(target_price > bounds.lower) || !(target_price < bounds.upper)) {
        throw ArbitrageViolation("implied_vol: target outside no-arbitrage bounds");
    }

    // Work on the out-of-the-money side of put-call parity: its price is pure
    // time value, so the log-price below keeps full relative precision.
    const double forward_gap = spot - strike * std::exp(-rate * tau); // C - P
    double target = target_price;
    if (right == OptionRight::call && forward_gap > 0.0) {
        in.right = OptionRight::put;
        target = target_price - forward_gap;
    } else if (right == OptionRight::put && forward_gap < 0.0) {
        in.right = OptionRight::call;
        target = target_price + forward_gap;
    }
    if (!(target > 0.0)) {
        throw ArbitrageViolation("implied_vol: no time value left in target");
    }
    const double log_target = std::log(target);

    // f(sigma) = log price(sigma) - log target, strictly increasing in sigma.
    auto objective = [&](double sigma, double& slope) {
        in.sigma = sigma;
        const double p = price_unchecked(in);
        if (!(p > 0.0)) {
            slope = std::numeric_limits<double>::infinity();
            return -std::numeric_limits<double>::infinity();
        }
        slope = vega_unchecked(in) / p;
        return std::log(p) - log_target;
    };

    double lo = opts.sigma_lo;
    double hi = opts.sigma_hi;
    double slope = 0.0;
    if (objective(hi, slope) < 0.0 || objective(lo, slope) > 0.0) {
        throw NotConverged("implied_vol: root not bracketed", lo, hi);
    }

    const double moneyness_guess = std::sqrt(2.0 * std::abs(std::log(spot / strike) + rate * tau) / tau);
    double sigma = std::clamp(std::max(moneyness_guess, 0.2), lo * 2.0, hi * 0.5);

    const double price_tol = opts.price_tol_rel * spot;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const double f = objective(sigma, slope);
        if (f == 0.0) return {sigma, true, it};
        if (f < 0.0) lo = sigma; else hi = sigma;

        double next = sigma - f / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        const double step = std::abs(next - sigma);
        sigma = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * sigma || hi - lo <= 1e-15) {
            in.sigma = sigma;
            in.right = right;
            const double err = std::abs(price_unchecked(in) - target_price);
            if (err <= price_tol) return {sigma, true, it};
            throw NotConverged("implied_vol: stalled outside price tolerance", lo, hi);
        }
    }
    throw NotConverged("implied_vol: iteration budget exhausted", lo, hi);
}

} // namespace smilejump
