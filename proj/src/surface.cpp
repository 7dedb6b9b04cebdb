#include "smilejump/surface.hpp"

#include "smilejump/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smilejump {

namespace {

using Point2 = std::array<double, 2>;

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; input need not be sorted. Counter-clockwise output.
std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = a[0] + t * dx - p[0];
    const double ey = a[1] + t * dy - p[1];
    return std::sqrt(ex * ex + ey * ey);
}

bool hull_contains(const std::vector<Point2>& hull, const Point2& p, double margin) {
    if (hull.size() < 3) return false;
    // Scale-aware slack so that points on an edge count as inside.
    constexpr double kSlack = 1e-12;
    bool inside = true;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        const double edge = std::hypot(b[0] - a[0], b[1] - a[1]);
        if (cross(a, b, p) < -kSlack * edge) {
            inside = false;
            break;
        }
    }
    if (inside) return true;
    if (margin <= 0.0) return false;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        best = std::min(best, segment_distance(p, hull[i], hull[(i + 1) % hull.size()]));
    }
    return best <= margin;
}

double kernel_between(double m1, double t1, double m2, double t2) {
    const double dm = m1 - m2;
    const double dt = t1 - t2;
    return tps_kernel(dm * dm + dt * dt);
}

} // namespace

void MoneynessGrid::validate() const {
    if (!(width > 0.0) || !(hi > lo)) {
        throw ConfigError("moneyness grid needs hi > lo and width > 0");
    }
    const double bins = (hi - lo) / width;
    if (std::abs(bins - static_cast<double>(kBinCount)) > 1e-9) {
        throw ConfigError("moneyness grid must split into exactly 10 bins");
    }
}

std::array<double, kBinCount> MoneynessGrid::centers() const {
    std::array<double, kBinCount> out{};
    for (std::size_t k = 0; k < kBinCount; ++k) out[k] = center(k);
    return out;
}

double TpsSurface::value(double m, double tau) const {
    const double ts = tau * tau_scale;
    double v = affine[0] + affine[1] * m + affine[2] * ts;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        v += weights[i] * kernel_between(m, ts, centers[i].moneyness, centers[i].tau * tau_scale);
    }
    return v;
}

bool TpsSurface::in_domain(double m, double tau) const {
    return hull_contains(hull, {m, tau * tau_scale}, hull_margin);
}

TpsGeometry::TpsGeometry(std::vector<Location> locations, double lambda, double hull_margin,
                         double min_rcond)
    : locations_(std::move(locations)), lambda_(lambda), hull_margin_(hull_margin) {
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) {
        throw DomainError("fit_tps: lambda must be finite and >= 0");
    }
    const std::size_t n = locations_.size();
    if (n < 3) throw DegenerateGeometry("fit_tps: need at least 3 distinct locations");

    double m_lo = locations_[0].moneyness, m_hi = m_lo;
    double t_lo = locations_[0].tau, t_hi = t_lo;
    for (const auto& l : locations_) {
        if (!std::isfinite(l.moneyness) || !std::isfinite(l.tau)) {
            throw DomainError("fit_tps: non-finite location");
        }
        m_lo = std::min(m_lo, l.moneyness);
        m_hi = std::max(m_hi, l.moneyness);
        t_lo = std::min(t_lo, l.tau);
        t_hi = std::max(t_hi, l.tau);
    }
    if (!(m_hi > m_lo) || !(t_hi > t_lo)) {
        throw DegenerateGeometry("fit_tps: locations collinear along one axis");
    }
    tau_scale_ = (m_hi - m_lo) / (t_hi - t_lo);

    std::vector<Point2> scaled;
    scaled.reserve(n);
    for (const auto& l : locations_) scaled.push_back({l.moneyness, l.tau * tau_scale_});
    hull_ = convex_hull(scaled);
    if (hull_.size() < 3) throw DegenerateGeometry("fit_tps: locations are collinear");

    // Zero-area test relative to the spread of the points.
    double area2 = 0.0;
    for (std::size_t i = 0; i < hull_.size(); ++i) {
        const auto& a = hull_[i];
        const auto& b = hull_[(i + 1) % hull_.size()];
        area2 += a[0] * b[1] - a[1] * b[0];
    }
    const double spread = m_hi - m_lo;
    if (std::abs(area2) <= 1e-12 * spread * spread) {
        throw DegenerateGeometry("fit_tps: locations are collinear");
    }

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 3),
                                              static_cast<Eigen::Index>(n + 3));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < i; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double k = kernel_between(scaled[i][0], scaled[i][1], scaled[j][0], scaled[j][1]);
            a(ii, jj) = k;
            a(jj, ii) = k;
        }
        a(ii, ii) = lambda_;
        const auto ni = static_cast<Eigen::Index>(n);
        a(ii, ni) = a(ni, ii) = 1.0;
        a(ii, ni + 1) = a(ni + 1, ii) = scaled[i][0];
        a(ii, ni + 2) = a(ni + 2, ii) = scaled[i][1];
    }
    lu_.compute(a);
    const double rc = lu_.rcond();
    if (!(rc >= min_rcond)) {
        throw IllConditioned("fit_tps: system reciprocal condition " + std::to_string(rc));
    }
}

TpsSurface TpsGeometry::fit(std::span<const double> values) const {
    const std::size_t n = locations_.size();
    if (values.size() != n) throw DomainError("fit_tps: value count does not match locations");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 3));
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(values[i])) throw DomainError("fit_tps: non-finite value");
        rhs(static_cast<Eigen::Index>(i)) = values[i];
    }
    const Eigen::VectorXd coef = lu_.solve(rhs);

    TpsSurface s;
    s.centers = locations_;
    s.weights.assign(coef.data(), coef.data() + n);
    const auto ni = static_cast<Eigen::Index>(n);
    s.affine = {coef(ni), coef(ni + 1), coef(ni + 2)};
    s.lambda = lambda_;
    s.tau_scale = tau_scale_;
    s.hull_margin = hull_margin_;
    s.hull = hull_;
    return s;
}

bool TpsGeometry::in_domain(double m, double tau) const {
    return hull_contains(hull_, {m, tau * tau_scale_}, hull_margin_);
}

Eigen::MatrixXd TpsGeometry::evaluation_operator(std::span<const Location> queries) const {
    const std::size_t n = locations_.size();
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd k(ni + 3, static_cast<Eigen::Index>(queries.size()));
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const double m = queries[q].moneyness;
        const double ts = queries[q].tau * tau_scale_;
        if (!hull_contains(hull_, {m, ts}, hull_margin_)) {
            throw ExtrapolationRefused("evaluation query outside the fitted domain");
        }
        const auto qq = static_cast<Eigen::Index>(q);
        for (std::size_t i = 0; i < n; ++i) {
            k(static_cast<Eigen::Index>(i), qq) =
                kernel_between(m, ts, locations_[i].moneyness, locations_[i].tau * tau_scale_);
        }
        k(ni, qq) = 1.0;
        k(ni + 1, qq) = m;
        k(ni + 2, qq) = ts;
    }
    // The system matrix is symmetric, so A^-T k = A^-1 k.
    const Eigen::MatrixXd g = lu_.solve(k);
    return g.topRows(ni).transpose();
}

std::vector<IvPoint> canonical_points(std::vector<IvPoint> points) {
    std::sort(points.begin(), points.end(), [](const IvPoint& a, const IvPoint& b) {
        if (a.moneyness != b.moneyness) return a.moneyness < b.moneyness;
        if (a.tau != b.tau) return a.tau < b.tau;
        return a.iv < b.iv;
    });
    std::vector<IvPoint> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < points.size() && points[j].moneyness == points[i].moneyness &&
               points[j].tau == points[i].tau) {
            sum += points[j].iv;
            ++j;
        }
        out.push_back({points[i].moneyness, points[i].tau, sum / static_cast<double>(j - i)});
        i = j;
    }
    return out;
}

TpsSurface fit_tps(std::vector<IvPoint> points, double lambda, double hull_margin) {
    const auto canon = canonical_points(std::move(points));
    std::vector<Location> locs;
    std::vector<double> values;
    locs.reserve(canon.size());
    values.reserve(canon.size());
    for (const auto& p : canon) {
        locs.push_back({p.moneyness, p.tau});
        values.push_back(p.iv);
    }
    const TpsGeometry geometry(std::move(locs), lambda, hull_margin);
    return geometry.fit(values);
}

double eval_surface(const TpsSurface& surface, double m, double tau) {
    if (!surface.in_domain(m, tau)) {
        throw ExtrapolationRefused("eval_surface: query outside the fitted domain");
    }
    return surface.value(m, tau);
}

SmileSample extract_smile(const TpsSurface& surface, double tau, const MoneynessGrid& grid,
                          Timestamp at) {
    SmileSample s;
    s.day = at.day;
    s.minute = at.minute;
    s.tau = tau;
    for (std::size_t k = 0; k < kBinCount; ++k) {
        const double m = grid.center(k);
        if (!surface.in_domain(m, tau)) {
            throw SliceUnavailable("extract_smile: bin center outside the fitted domain");
        }
        s.iv_bins[k] = surface.value(m, tau);
        if (!(s.iv_bins[k] > 0.0)) {
            throw SliceUnavailable("extract_smile: non-positive interpolated volatility");
        }
    }
    return s;
}

} // namespace smilejump
