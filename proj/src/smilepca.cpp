#include "smilejump/smilepca.hpp"

#include "smilejump/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace smilejump {

DeltaIvPanel build_panel(std::span<const SmileSample> smiles, double tau) {
    std::vector<const SmileSample*> slice;
    for (const auto& s : smiles) {
        if (std::abs(s.tau - tau) <= 1e-12) slice.push_back(&s);
    }
    std::sort(slice.begin(), slice.end(), [](const SmileSample* a, const SmileSample* b) {
        return std::tie(a->day, a->minute) < std::tie(b->day, b->minute);
    });

    DeltaIvPanel panel;
    panel.tau = tau;
    std::vector<std::size_t> later;
    for (std::size_t i = 1; i < slice.size(); ++i) {
        if (slice[i]->day == slice[i - 1]->day && slice[i]->minute == slice[i - 1]->minute + 1) {
            later.push_back(i);
        }
    }
    if (later.empty()) throw EmptyPanel("build_panel: no consecutive minutes at this maturity");

    panel.values.resize(static_cast<Eigen::Index>(later.size()), static_cast<Eigen::Index>(kBinCount));
    panel.rows.reserve(later.size());
    for (std::size_t r = 0; r < later.size(); ++r) {
        const SmileSample& cur = *slice[later[r]];
        const SmileSample& prev = *slice[later[r] - 1];
        panel.rows.push_back({cur.day, cur.minute});
        for (std::size_t k = 0; k < kBinCount; ++k) {
            panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
                cur.iv_bins[k] - prev.iv_bins[k];
        }
    }
    return panel;
}

const char* to_string(SmileRegion r) {
    switch (r) {
    case SmileRegion::otm_put: return "otm_put";
    case SmileRegion::atm: return "atm";
    case SmileRegion::otm_call: return "otm_call";
    }
    return "atm";
}

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, double tol, int max_sweeps) {
    const Eigen::Index n = symmetric.rows();
    if (symmetric.cols() != n) throw DomainError("jacobi_eigen: matrix not square");
    Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    const double scale = std::max(a.norm(), 1e-300);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= tol * scale) break;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]).normalized();
    }
    return out;
}

Eigen::MatrixXd panel_covariance(const Eigen::MatrixXd& values, Eigen::VectorXd* means) {
    const Eigen::Index n = values.rows();
    if (n < 2) throw InsufficientData("panel_covariance: need at least 2 rows");
    const Eigen::VectorXd mu = values.colwise().mean().transpose();
    const Eigen::MatrixXd centered = values.rowwise() - mu.transpose();
    if (means) *means = mu;
    return (centered.transpose() * centered) / static_cast<double>(n - 1);
}

double varimax_criterion(const Eigen::MatrixXd& loadings) {
    const double p = static_cast<double>(loadings.rows());
    double total = 0.0;
    for (Eigen::Index j = 0; j < loadings.cols(); ++j) {
        const Eigen::ArrayXd sq = loadings.col(j).array().square();
        const double m2 = sq.sum() / p;
        const double m4 = sq.square().sum() / p;
        total += m4 - m2 * m2;
    }
    return total;
}

void normalize_signs(Eigen::MatrixXd& loadings) {
    for (Eigen::Index j = 0; j < loadings.cols(); ++j) {
        Eigen::Index arg = 0;
        loadings.col(j).cwiseAbs().maxCoeff(&arg);
        if (loadings(arg, j) < 0.0) loadings.col(j) *= -1.0;
    }
}

VarimaxResult varimax(const Eigen::MatrixXd& input, double angle_tol, int max_sweeps) {
    VarimaxResult out;
    Eigen::MatrixXd b = input;
    const double p = static_cast<double>(b.rows());
    out.criterion_trace.push_back(varimax_criterion(b));
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double largest = 0.0;
        for (Eigen::Index i = 0; i < b.cols(); ++i) {
            for (Eigen::Index j = i + 1; j < b.cols(); ++j) {
                double sa = 0.0, sb = 0.0, sc = 0.0, sd = 0.0;
                for (Eigen::Index r = 0; r < b.rows(); ++r) {
                    const double x = b(r, i);
                    const double y = b(r, j);
                    const double u = x * x - y * y;
                    const double v = 2.0 * x * y;
                    sa += u;
                    sb += v;
                    sc += u * u - v * v;
                    sd += 2.0 * u * v;
                }
                const double num = sd - 2.0 * sa * sb / p;
                const double den = sc - (sa * sa - sb * sb) / p;
                const double phi = 0.25 * std::atan2(num, den);
                largest = std::max(largest, std::abs(phi));
                if (std::abs(phi) <= angle_tol) continue;
                const double c = std::cos(phi);
                const double s = std::sin(phi);
                for (Eigen::Index r = 0; r < b.rows(); ++r) {
                    const double x = b(r, i);
                    const double y = b(r, j);
                    b(r, i) = c * x + s * y;
                    b(r, j) = -s * x + c * y;
                }
            }
        }
        ++out.sweeps;
        out.criterion_trace.push_back(varimax_criterion(b));
        if (largest <= angle_tol) break;
    }
    normalize_signs(b);
    out.loadings = std::move(b);
    return out;
}

PcaModel fit_pca(const DeltaIvPanel& panel, int k, bool rotate) {
    const Eigen::Index cols = panel.values.cols();
    const Eigen::Index rows = panel.values.rows();
    if (k < 1 || k > cols) throw DomainError("fit_pca: k out of range");
    if (rows <= cols) throw InsufficientData("fit_pca: need more rows than columns");

    PcaModel model;
    model.tau = panel.tau;
    model.rows = static_cast<std::size_t>(rows);
    model.few_rows = rows < 10 * cols;

    const Eigen::MatrixXd cov = panel_covariance(panel.values, &model.column_means);
    const SymmetricEigen eig = jacobi_eigen(cov);
    model.eigenvalues = eig.values;
    const double trace = eig.values.sum();
    const double rank_tol = 1e-12 * std::max(eig.values(0), 0.0);
    if (!(trace > 0.0) || eig.values(k - 1) <= rank_tol) {
        throw DomainError("fit_pca: covariance rank below requested component count");
    }

    model.raw_loadings = eig.vectors.leftCols(k);
    normalize_signs(model.raw_loadings);
    model.explained = eig.values.head(k) / trace;
    model.total_explained = model.explained.sum();

    Eigen::MatrixXd rotated = model.raw_loadings;
    if (rotate) rotated = varimax(model.raw_loadings).loadings;

    // Order rotated columns by the variance they carry.
    Eigen::VectorXd carried(k);
    for (int j = 0; j < k; ++j) carried(j) = rotated.col(j).dot(cov * rotated.col(j)) / trace;
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return carried(a) > carried(b); });
    model.loadings.resize(cols, k);
    model.rotated_explained.resize(k);
    for (int j = 0; j < k; ++j) {
        model.loadings.col(j) = rotated.col(order[static_cast<std::size_t>(j)]);
        model.rotated_explained(j) = carried(order[static_cast<std::size_t>(j)]);
    }

    const MoneynessGrid grid{};
    for (int j = 0; j < k; ++j) {
        model.signs.push_back(model.loadings.col(j).sum() >= 0.0 ? 1 : -1);
        Eigen::Index arg = 0;
        model.loadings.col(j).cwiseAbs().maxCoeff(&arg);
        const double m = cols == static_cast<Eigen::Index>(kBinCount)
                             ? grid.center(static_cast<std::size_t>(arg))
                             : 1.0;
        model.regions.push_back(m > 1.05 ? SmileRegion::otm_call
                                         : (m < 0.95 ? SmileRegion::otm_put : SmileRegion::atm));
    }
    return model;
}

ScorePanel compute_scores(const DeltaIvPanel& panel, const PcaModel& model) {
    if (panel.values.cols() != model.loadings.rows() ||
        panel.values.cols() != model.column_means.size()) {
        throw SchemaError("compute_scores: panel columns do not match the model");
    }
    ScorePanel out;
    out.tau = panel.tau;
    out.rows = panel.rows;
    out.scores = (panel.values.rowwise() - model.column_means.transpose()) * model.loadings;
    return out;
}

ScorePanel deseasonalize(const ScorePanel& in) {
    ScorePanel out = in;
    const Eigen::Index k = in.scores.cols();
    struct Cell {
        std::vector<Eigen::Index> rows;
    };
    std::map<int, Cell> cells;
    for (std::size_t r = 0; r < in.rows.size(); ++r) {
        cells[in.rows[r].minute].rows.push_back(static_cast<Eigen::Index>(r));
    }
    out.unadjusted_minutes.clear();
    for (const auto& [minute, cell] : cells) {
        if (cell.rows.size() < 2) {
            out.unadjusted_minutes.push_back(minute);
            continue;
        }
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(k);
        for (const auto r : cell.rows) mean += in.scores.row(r);
        mean /= static_cast<double>(cell.rows.size());
        for (const auto r : cell.rows) out.scores.row(r) -= mean;
    }
    out.deseasonalized = true;
    return out;
}

} // namespace smilejump
