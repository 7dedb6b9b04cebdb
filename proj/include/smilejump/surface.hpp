#pragma once

#include "smilejump/calendar.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace smilejump {

inline constexpr std::size_t kBinCount = 10;

struct IvPoint {
    double moneyness = 0.0; // K / S_t
    double tau = 0.0;       // years
    double iv = 0.0;
};

/// Moneyness bins over [lo, hi]; values are sampled at bin centers.
struct MoneynessGrid {
    double lo = 0.8;
    double hi = 1.3;
    double width = 0.05;

    /// Throws ConfigError unless the range splits into exactly kBinCount bins.
    void validate() const;
    double center(std::size_t k) const { return lo + width * (static_cast<double>(k) + 0.5); }
    std::array<double, kBinCount> centers() const;
};

struct SmileSample {
    Date day{};
    int minute = 0;
    double tau = 0.0;
    std::array<double, kBinCount> iv_bins{};
};

struct Location {
    double moneyness = 0.0;
    double tau = 0.0;
    auto operator<=>(const Location&) const = default;
};

/// Thin-plate spline over (moneyness, scaled maturity).
///
/// The maturity axis is multiplied by `tau_scale` so that the fitted points span
/// the same range in both coordinates; the kernel is phi(r) = r^2 log r in those
/// scaled coordinates. `affine` holds (a0, a_m, a_tau) with a_tau in scaled units.
struct TpsSurface {
    std::vector<Location> centers; // original (m, tau) coordinates, sorted
    std::vector<double> weights;
    std::array<double, 3> affine{};
    double lambda = 0.0;
    double tau_scale = 1.0;
    double hull_margin = 0.0;
    std::vector<std::array<double, 2>> hull; // counter-clockwise, scaled coordinates

    /// Spline value with no domain check.
    double value(double m, double tau) const;
    bool in_domain(double m, double tau) const;
};

/// Factorized TPS system for one fixed set of distinct, sorted locations.
/// Reusable for any number of value vectors and evaluation queries.
class TpsGeometry {
public:
    TpsGeometry(std::vector<Location> locations, double lambda, double hull_margin = 0.0,
                double min_rcond = 1e-14);

    const std::vector<Location>& locations() const noexcept { return locations_; }
    std::size_t size() const noexcept { return locations_.size(); }
    double lambda() const noexcept { return lambda_; }

    TpsSurface fit(std::span<const double> values) const;

    bool in_domain(double m, double tau) const;

    /// Row q holds the weights g_q with value(query_q) = g_q . y for every value
    /// vector y on these locations. Throws ExtrapolationRefused for queries
    /// outside the evaluation domain.
    Eigen::MatrixXd evaluation_operator(std::span<const Location> queries) const;

private:
    std::vector<Location> locations_;
    double lambda_;
    double hull_margin_;
    double tau_scale_ = 1.0;
    std::vector<std::array<double, 2>> hull_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Sorts by (m, tau) and averages the iv of duplicate locations.
std::vector<IvPoint> canonical_points(std::vector<IvPoint> points);

TpsSurface fit_tps(std::vector<IvPoint> points, double lambda, double hull_margin = 0.0);

/// Throws ExtrapolationRefused outside the (margin-expanded) convex hull of the centers.
double eval_surface(const TpsSurface& surface, double m, double tau);

/// Throws SliceUnavailable if any bin center cannot be evaluated at this tau.
SmileSample extract_smile(const TpsSurface& surface, double tau, const MoneynessGrid& grid,
                          Timestamp at = {});

/// Thin-plate kernel r^2 log r, with phi(0) = 0.
inline double tps_kernel(double r2) {
    return r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0;
}

} // namespace smilejump
