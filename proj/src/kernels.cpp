#include "smilejump/kernels.hpp"

#include "smilejump/errors.hpp"
#include "smilejump/parallel.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>

namespace smilejump {

int worker_count() {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("SMILEJUMP_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0 && cap < n) n = static_cast<int>(cap);
    }
    return n;
}

void configure_workers(int cap) {
    int n = worker_count();
    if (cap > 0 && cap < n) n = cap;
    omp_set_num_threads(n);
}

std::vector<IvPoint> minute_iv_points(const MinuteQuotes& minute, const SurfaceConfig& cfg,
                                      MinuteStats& stats) {
    std::vector<IvPoint> pts;
    pts.reserve(minute.quotes.size());
    for (const auto& q : minute.quotes) {
        const int days = calendar_days_between(q.timestamp.day, q.expiry);
        if (days <= 0) {
            ++stats.rejected_filter;
            continue;
        }
        if (cfg.otm_only) {
            const bool otm = q.right == OptionRight::put ? q.strike <= q.spot : q.strike >= q.spot;
            if (!otm) {
                ++stats.rejected_filter;
                continue;
            }
        }
        if (!(q.bid > 0.0) || q.ask < q.bid) {
            ++stats.rejected_arbitrage;
            continue;
        }
        const double tau = days / 365.0;
        try {
            const auto iv = implied_vol(q.mid(), q.spot, q.strike, cfg.rate, tau, q.right, cfg.solver);
            pts.push_back({q.strike / q.spot, tau, iv.value});
            ++stats.quotes_used;
        } catch (const ArbitrageViolation&) {
            ++stats.rejected_arbitrage;
        } catch (const NotConverged&) {
            ++stats.rejected_solver;
        } catch (const DomainError&) {
            ++stats.rejected_arbitrage;
        }
    }
    return canonical_points(std::move(pts));
}

namespace {

double solve_one(const PricingInputs& p, double target, const IvSolverOptions& opts) {
    try {
        return implied_vol(target, p.spot, p.strike, p.rate, p.tau, p.right, opts).value;
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

std::vector<Location> query_locations(const SurfaceConfig& cfg, double tau) {
    std::vector<Location> q;
    q.reserve(kBinCount);
    for (std::size_t k = 0; k < kBinCount; ++k) q.push_back({cfg.grid.center(k), tau});
    return q;
}

// Factorized geometry plus one evaluation operator per tau (null when the
// slice leaves the domain).
struct CachedGeometry {
    std::vector<Location> locations;
    std::unique_ptr<TpsGeometry> geometry;
    std::vector<std::optional<Eigen::MatrixXd>> operators;
    bool failed = false;
};

void rebuild(CachedGeometry& cache, std::vector<Location> locs, const SurfaceConfig& cfg) {
    cache.locations = std::move(locs);
    cache.operators.assign(cfg.taus.size(), std::nullopt);
    cache.failed = false;
    try {
        cache.geometry = std::make_unique<TpsGeometry>(cache.locations, cfg.lambda, cfg.hull_margin);
    } catch (const DegenerateGeometry&) {
        cache.geometry.reset();
        cache.failed = true;
        return;
    } catch (const IllConditioned&) {
        cache.geometry.reset();
        cache.failed = true;
        return;
    }
    for (std::size_t t = 0; t < cfg.taus.size(); ++t) {
        const auto queries = query_locations(cfg, cfg.taus[t]);
        try {
            cache.operators[t] = cache.geometry->evaluation_operator(queries);
        } catch (const ExtrapolationRefused&) {
            cache.operators[t] = std::nullopt;
        }
    }
}

MinuteSmiles smiles_with_cache(const MinuteQuotes& minute, const SurfaceConfig& cfg,
                               CachedGeometry& cache) {
    MinuteSmiles out;
    out.ts = minute.ts;
    out.by_tau.assign(cfg.taus.size(), std::nullopt);
    const auto pts = minute_iv_points(minute, cfg, out.stats);

    std::vector<Location> locs;
    locs.reserve(pts.size());
    for (const auto& p : pts) locs.push_back({p.moneyness, p.tau});
    if (locs.size() < 3) {
        out.stats.surface_failed = true;
        return out;
    }
    if (!cache.geometry && !cache.failed) {
        rebuild(cache, std::move(locs), cfg);
    } else if (locs != cache.locations) {
        rebuild(cache, std::move(locs), cfg);
    }
    if (cache.failed) {
        out.stats.surface_failed = true;
        return out;
    }

    Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) y(static_cast<Eigen::Index>(i)) = pts[i].iv;
    for (std::size_t t = 0; t < cfg.taus.size(); ++t) {
        if (!cache.operators[t]) continue;
        const Eigen::VectorXd bins = (*cache.operators[t]) * y;
        std::array<double, kBinCount> row{};
        bool ok = true;
        for (std::size_t k = 0; k < kBinCount; ++k) {
            row[k] = bins(static_cast<Eigen::Index>(k));
            ok = ok && row[k] > 0.0 && std::isfinite(row[k]);
        }
        if (ok) out.by_tau[t] = row;
    }
    return out;
}

} // namespace

std::vector<double> implied_vols(std::span<const PricingInputs> problems,
                                 std::span<const double> targets, const IvSolverOptions& opts) {
    if (problems.size() != targets.size()) throw DomainError("implied_vols: size mismatch");
    std::vector<double> out(problems.size());
    const auto n = static_cast<std::ptrdiff_t>(problems.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            solve_one(problems[static_cast<std::size_t>(i)], targets[static_cast<std::size_t>(i)], opts);
    }
    return out;
}

std::vector<MinuteSmiles> extract_minute_smiles(std::span<const MinuteQuotes> minutes,
                                                const SurfaceConfig& cfg) {
    cfg.grid.validate();
    std::vector<MinuteSmiles> out(minutes.size());
    const auto n = static_cast<std::ptrdiff_t>(minutes.size());
#pragma omp parallel
    {
        CachedGeometry cache;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            out[idx] = smiles_with_cache(minutes[idx], cfg, cache);
        }
    }
    return out;
}

namespace reference {

std::vector<double> implied_vols(std::span<const PricingInputs> problems,
                                 std::span<const double> targets, const IvSolverOptions& opts) {
    if (problems.size() != targets.size()) throw DomainError("implied_vols: size mismatch");
    std::vector<double> out;
    out.reserve(problems.size());
    for (std::size_t i = 0; i < problems.size(); ++i) {
        out.push_back(solve_one(problems[i], targets[i], opts));
    }
    return out;
}

std::vector<MinuteSmiles> extract_minute_smiles(std::span<const MinuteQuotes> minutes,
                                                const SurfaceConfig& cfg) {
    cfg.grid.validate();
    std::vector<MinuteSmiles> out;
    out.reserve(minutes.size());
    for (const auto& minute : minutes) {
        MinuteSmiles ms;
        ms.ts = minute.ts;
        ms.by_tau.assign(cfg.taus.size(), std::nullopt);
        auto pts = minute_iv_points(minute, cfg, ms.stats);
        try {
            const TpsSurface surface = fit_tps(std::move(pts), cfg.lambda, cfg.hull_margin);
            for (std::size_t t = 0; t < cfg.taus.size(); ++t) {
                try {
                    ms.by_tau[t] = extract_smile(surface, cfg.taus[t], cfg.grid, minute.ts).iv_bins;
                } catch (const SliceUnavailable&) {
                }
            }
        } catch (const DegenerateGeometry&) {
            ms.stats.surface_failed = true;
        } catch (const IllConditioned&) {
            ms.stats.surface_failed = true;
        }
        out.push_back(std::move(ms));
    }
    return out;
}

} // namespace reference

} // namespace smilejump
