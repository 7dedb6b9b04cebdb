#pragma once

// Data-parallel kernels of the surface stage. Each OpenMP kernel has a serial
// reference in smilejump::reference built from the per-minute fit_tps /
// extract_smile path; tests hold the two to agreement and the bench target
// times them against each other.

#include "smilejump/pricing.hpp"
#include "smilejump/surface.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace smilejump {

struct SurfaceConfig {
    double rate = 0.0;
    double lambda = 1e-6;
    double hull_margin = 0.0;
    MoneynessGrid grid{};
    std::vector<double> taus{0.25, 0.5, 0.75};
    bool otm_only = true; // use puts below spot and calls at or above it
    IvSolverOptions solver{};
};

/// All quotes observed at one minute.
struct MinuteQuotes {
    Timestamp ts;
    std::span<const OptionQuote> quotes;
};

struct MinuteStats {
    std::uint32_t quotes_used = 0;
    std::uint32_t rejected_filter = 0;    // in-the-money side or expired
    std::uint32_t rejected_arbitrage = 0; // mid outside no-arbitrage bounds, zero bid
    std::uint32_t rejected_solver = 0;    // implied_vol did not converge
    bool surface_failed = false;          // degenerate or ill-conditioned geometry
};

struct MinuteSmiles {
    Timestamp ts;
    // One entry per configured tau; empty when the slice is unavailable.
    std::vector<std::optional<std::array<double, kBinCount>>> by_tau;
    MinuteStats stats;
};

/// Implied-vol points of one minute's quotes, in canonical (sorted, de-duplicated) order.
std::vector<IvPoint> minute_iv_points(const MinuteQuotes& minute, const SurfaceConfig& cfg,
                                      MinuteStats& stats);

/// Implied vols of a batch of independent pricing problems; NaN where the
/// target is out of bounds or the solver fails.
std::vector<double> implied_vols(std::span<const PricingInputs> problems,
                                 std::span<const double> targets, const IvSolverOptions& opts = {});

/// OpenMP kernel: per-minute smile extraction, caching the factorized TPS
/// geometry and its evaluation operator across minutes that share locations.
std::vector<MinuteSmiles> extract_minute_smiles(std::span<const MinuteQuotes> minutes,
                                                const SurfaceConfig& cfg);

namespace reference {

std::vector<double> implied_vols(std::span<const PricingInputs> problems,
                                 std::span<const double> targets, const IvSolverOptions& opts = {});

std::vector<MinuteSmiles> extract_minute_smiles(std::span<const MinuteQuotes> minutes,
                                                const SurfaceConfig& cfg);

} // namespace reference

} // namespace smilejump
