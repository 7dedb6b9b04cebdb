#pragma once

#include "smilejump/calendar.hpp"
#include "smilejump/surface.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace smilejump {

/// Minute-over-minute changes of the binned smile at one maturity.
struct DeltaIvPanel {
    double tau = 0.0;
    std::vector<Timestamp> rows; // timestamp of the later minute of each pair
    Eigen::MatrixXd values;      // rows x kBinCount
};

/// Rows exist only where minutes t-1 and t of the same session both have a smile.
/// Throws EmptyPanel when no pair qualifies.
DeltaIvPanel build_panel(std::span<const SmileSample> smiles, double tau);

enum class SmileRegion { otm_put, atm, otm_call };

const char* to_string(SmileRegion r);

struct PcaModel {
    double tau = 0.0;
    std::size_t rows = 0;
    Eigen::VectorXd column_means;      // kBinCount
    Eigen::VectorXd eigenvalues;       // all, descending
    Eigen::MatrixXd raw_loadings;      // kBinCount x k eigenvectors before rotation
    Eigen::MatrixXd loadings;          // kBinCount x k, varimax-rotated
    Eigen::VectorXd explained;         // k pre-rotation fractions lambda_i / trace
    double total_explained = 0.0;
    Eigen::VectorXd rotated_explained; // k fractions carried by each rotated column
    std::vector<int> signs;            // general sign of each rotated column (sum of loadings)
    std::vector<SmileRegion> regions;  // region of each rotated column's largest loading
    bool few_rows = false;             // fewer than 10 rows per column
};

struct SymmetricEigen {
    Eigen::VectorXd values;  // descending
    Eigen::MatrixXd vectors; // columns, unit norm
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, double tol = 1e-15, int max_sweeps = 100);

/// Unbiased covariance of the column-centered panel.
Eigen::MatrixXd panel_covariance(const Eigen::MatrixXd& values, Eigen::VectorXd* means = nullptr);

/// Sum over columns of the variance of squared loadings.
double varimax_criterion(const Eigen::MatrixXd& loadings);

struct VarimaxResult {
    Eigen::MatrixXd loadings;
    std::vector<double> criterion_trace; // criterion after each sweep, starting with the input
    int sweeps = 0;
};

/// Raw varimax by pairwise planar rotations (no Kaiser row normalization).
/// Columns of the result have their largest-|loading| entry positive.
VarimaxResult varimax(const Eigen::MatrixXd& loadings, double angle_tol = 1e-13, int max_sweeps = 500);

/// Flips columns so that each column's largest-magnitude entry is positive.
void normalize_signs(Eigen::MatrixXd& loadings);

/// Covariance PCA on the panel, top k components, then varimax. Rotated
/// columns are ordered by the variance they carry.
PcaModel fit_pca(const DeltaIvPanel& panel, int k = 3, bool rotate = true);

struct ScorePanel {
    double tau = 0.0;
    std::vector<Timestamp> rows;
    Eigen::MatrixXd scores; // rows x k
    bool deseasonalized = false;
    std::vector<int> unadjusted_minutes; // minute-of-day cells seen on fewer than 2 days
};

/// S = (X - column_means) * B. Throws SchemaError on a column mismatch.
ScorePanel compute_scores(const DeltaIvPanel& panel, const PcaModel& model);

/// Subtracts each minute-of-day's cross-day mean from every score column.
ScorePanel deseasonalize(const ScorePanel& scores);

} // namespace smilejump
