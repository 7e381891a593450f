#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "infers/record.hpp"

namespace infers {

struct TrimOptions {
    double fraction = 0.10;
    std::size_t max_steps = 100;
    double relative_tolerance = 1e-12;
};

// Outcome of minimum-covariance-determinant trimming.  `kept` and `flagged`
// partition the input indices and are sorted ascending.
struct TrimResult {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> flagged;
    std::size_t h = 0;
    std::vector<double> det_history;  // covariance determinant after each C-step
    std::size_t start = 0;            // index of the winning deterministic start
};

// Rows are observations.  For records the 12 columns are (u, v) of I, N, F, E, R, S.
Eigen::MatrixXd feature_matrix(std::span<const CollocationRecord> records);

// Subset size ceil((1 - fraction) * n).
std::size_t trimmed_size(std::size_t n, double fraction);

// Deterministic MCD: six robust starts computed in affine-invariant
// coordinates, each refined by C-steps; the lowest determinant wins (ties go
// to the lower start index).  Throws TooFewRecords when n < 3 * columns and
// SingularCovariance on degenerate data.
TrimResult trim_outliers(const Eigen::MatrixXd& x, const TrimOptions& options = {});
TrimResult trim_outliers(std::span<const CollocationRecord> records, const TrimOptions& options = {});

// One concentration step: the h rows of smallest Mahalanobis distance with
// respect to the mean and covariance of `subset` (sorted ascending).
std::vector<std::size_t> c_step(const Eigen::MatrixXd& x, std::span<const std::size_t> subset,
                                std::size_t h);

// Determinant of the sample covariance of the given rows.
double covariance_determinant(const Eigen::MatrixXd& x, std::span<const std::size_t> subset);

}  // namespace infers
