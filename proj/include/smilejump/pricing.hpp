#pragma once

#include "smilejump/calendar.hpp"

namespace smilejump {

enum class OptionRight { call, put };

struct OptionQuote {
    Timestamp timestamp;
    Date expiry{};
    double strike = 0.0;
    OptionRight right = OptionRight::call;
    double bid = 0.0;
    double ask = 0.0;
    double spot = 0.0; // contemporaneous underlying price

    double mid() const noexcept { return 0.5 * (bid + ask); }
    bool operator==(const OptionQuote&) const = default;
};

struct PricingInputs {
    double spot = 0.0;
    double strike = 0.0;
    double rate = 0.0; // continuously compounded, annualized
    double tau = 0.0;  // years
    double sigma = 0.0;
    OptionRight right = OptionRight::call;
};

struct PriceBounds {
    double lower = 0.0;
    double upper = 0.0;
};

struct ImpliedVol {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct IvSolverOptions {
    double sigma_lo = 1e-6;
    double sigma_hi = 5.0;
    int max_iter = 100;
    double price_tol_rel = 1e-8; // tolerance on |price - target| as a fraction of spot
};

/// Black-Scholes price of a European option, no dividends.
double bs_price(const PricingInputs& in);

/// dPrice/dSigma; identical for calls and puts.
double bs_vega(const PricingInputs& in);

/// No-arbitrage bounds for a European option price.
PriceBounds price_bounds(double spot, double strike, double rate, double tau, OptionRight right);

/// Inverts bs_price for sigma with a bracketed, safeguarded Newton iteration.
///
/// Throws ArbitrageViolation if the target is not strictly inside the bounds of
/// price_bounds(), and NotConverged if the root is not bracketed by
/// [sigma_lo, sigma_hi] or the iteration budget runs out.
ImpliedVol implied_vol(double target_price, double spot, double strike, double rate, double tau,
                       OptionRight right, const IvSolverOptions& opts = {});

/// Out-of-the-money right for a strike: puts below the forward-neutral spot, calls at or above.
inline OptionRight otm_right(double spot, double strike) {
    return strike < spot ? OptionRight::put : OptionRight::call;
}

} // namespace smilejump
