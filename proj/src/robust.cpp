#include "infers/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>

#include "infers/error.hpp"

namespace infers {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kMadConsistency = 1.482602218505602;

double median(std::vector<double> v)
{
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

std::vector<double> column(const MatrixXd& x, Eigen::Index j)
{
    std::vector<double> c(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) c[static_cast<std::size_t>(i)] = x(i, j);
    return c;
}

double mad(const std::vector<double>& v)
{
    const double med = median(v);
    std::vector<double> dev(v.size());
    std::transform(v.begin(), v.end(), dev.begin(), [med](double a) { return std::abs(a - med); });
    return kMadConsistency * median(std::move(dev));
}

MatrixXd correlation_of(const MatrixXd& y)
{
    const MatrixXd centered = y.rowwise() - y.colwise().mean();
    MatrixXd c = centered.transpose() * centered;
    const VectorXd sd = c.diagonal().cwiseSqrt();
    for (Eigen::Index a = 0; a < c.rows(); ++a) {
        for (Eigen::Index b = 0; b < c.cols(); ++b) {
            c(a, b) = (sd(a) > 0.0 && sd(b) > 0.0) ? c(a, b) / (sd(a) * sd(b)) : (a == b ? 1.0 : 0.0);
        }
    }
    return c;
}

// Average ranks (1-based), ties share the mean rank.
MatrixXd ranks_of(const MatrixXd& z)
{
    const std::size_t n = static_cast<std::size_t>(z.rows());
    MatrixXd r(z.rows(), z.cols());
    std::vector<std::size_t> order(n);
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return z(static_cast<Eigen::Index>(a), j) < z(static_cast<Eigen::Index>(b), j);
        });
        std::size_t i = 0;
        while (i < n) {
            std::size_t k = i;
            while (k + 1 < n && z(static_cast<Eigen::Index>(order[k + 1]), j) == z(static_cast<Eigen::Index>(order[i]), j)) ++k;
            const double avg = 0.5 * static_cast<double>(i + k) + 1.0;
            for (std::size_t q = i; q <= k; ++q) r(static_cast<Eigen::Index>(order[q]), j) = avg;
            i = k + 1;
        }
    }
    return r;
}

struct Scatter {
    VectorXd mean;
    MatrixXd cov;
};

Scatter sample_scatter(const MatrixXd& x, std::span<const std::size_t> subset)
{
    const Eigen::Index p = x.cols();
    VectorXd mean = VectorXd::Zero(p);
    for (std::size_t i : subset) mean += x.row(static_cast<Eigen::Index>(i)).transpose();
    mean /= static_cast<double>(subset.size());
    MatrixXd cov = MatrixXd::Zero(p, p);
    VectorXd d(p);
    for (std::size_t i : subset) {
        d = x.row(static_cast<Eigen::Index>(i)).transpose() - mean;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
    }
    cov = MatrixXd(cov.selfadjointView<Eigen::Lower>()) / static_cast<double>(subset.size() - 1);
    return {mean, cov};
}

// Indices of the h smallest distances, ties by index, returned sorted.
std::vector<std::size_t> smallest(const VectorXd& dist, std::size_t h)
{
    std::vector<std::size_t> idx(static_cast<std::size_t>(dist.size()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto less = [&](std::size_t a, std::size_t b) {
        const double da = dist(static_cast<Eigen::Index>(a));
        const double db = dist(static_cast<Eigen::Index>(b));
        return da < db || (da == db && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h - 1), idx.end(), less);
    idx.resize(h);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Squared Mahalanobis distances; nullopt if the scatter is not positive definite.
std::optional<VectorXd> distances(const MatrixXd& x, const Scatter& s)
{
    Eigen::LLT<MatrixXd> llt(s.cov);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const MatrixXd centered = (x.rowwise() - s.mean.transpose()).transpose();
    const MatrixXd solved = llt.matrixL().solve(centered);
    return solved.colwise().squaredNorm().transpose();
}

std::optional<double> log_det(const MatrixXd& cov)
{
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const VectorXd diag = MatrixXd(llt.matrixL()).diagonal();
    if ((diag.array() <= 0.0).any()) return std::nullopt;
    return 2.0 * diag.array().log().sum();
}

// Classical whitening followed by the eigenbasis of the fourth-moment
// scatter.  The resulting coordinates change only by per-column sign under an
// affine map of the rows.
MatrixXd invariant_coordinates(const MatrixXd& x)
{
    const VectorXd mean = x.colwise().mean().transpose();
    const MatrixXd centered = x.rowwise() - mean.transpose();
    const MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    const VectorXd ev = eig.eigenvalues();
    if (!(ev.maxCoeff() > 0.0) || !(ev.minCoeff() > 1e-12 * ev.maxCoeff())) {
        throw Error(ErrorCode::SingularCovariance, "covariance of all rows is singular");
    }
    const MatrixXd inv_sqrt = eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                              eig.eigenvectors().transpose();
    const MatrixXd w = centered * inv_sqrt;

    const VectorXd norms = w.rowwise().squaredNorm();
    const MatrixXd fourth = w.transpose() * norms.asDiagonal() * w / static_cast<double>(x.rows());
    Eigen::SelfAdjointEigenSolver<MatrixXd> rot(fourth);
    return w * rot.eigenvectors();
}

// The six deterministic initial scatter estimates on robustly standardized data.
std::vector<MatrixXd> initial_scatters(const MatrixXd& zs)
{
    const Eigen::Index n = zs.rows();
    const Eigen::Index p = zs.cols();
    std::vector<MatrixXd> out;

    out.push_back(correlation_of(zs.array().tanh().matrix()));

    const MatrixXd ranks = ranks_of(zs);
    out.push_back(correlation_of(ranks));

    const boost::math::normal standard;
    const double dn = static_cast<double>(n);
    MatrixXd scores = ranks.unaryExpr([&](double r) {
        return boost::math::quantile(standard, (r - 1.0 / 3.0) / (dn + 1.0 / 3.0));
    });
    out.push_back(correlation_of(scores));

    MatrixXd signs = zs;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = zs.row(i).norm();
        if (norm > 0.0) {
            signs.row(i) /= norm;
        } else {
            signs.row(i).setZero();
        }
    }
    out.push_back(signs.transpose() * signs / dn);

    const VectorXd norms = zs.rowwise().norm();
    const auto half = smallest(norms, static_cast<std::size_t>((n + 1) / 2));
    out.push_back(sample_scatter(zs, half).cov);

    MatrixXd gk(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
        gk(a, a) = 1.0;
        for (Eigen::Index b = a + 1; b < p; ++b) {
            const double sp = mad(column((zs.col(a) + zs.col(b)).eval(), 0));
            const double sm = mad(column((zs.col(a) - zs.col(b)).eval(), 0));
            gk(a, b) = gk(b, a) = 0.25 * (sp * sp - sm * sm);
        }
    }
    out.push_back(gk);
    return out;
}

// Turns an initial shape matrix into a location/scatter pair: robust scales
// along its eigenvectors and a coordinatewise median in the sphered space.
std::optional<Scatter> orthogonalize(const MatrixXd& zs, const MatrixXd& shape)
{
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(shape);
    const MatrixXd& vec = eig.eigenvectors();
    const MatrixXd projected = zs * vec;
    VectorXd scale(zs.cols());
    for (Eigen::Index j = 0; j < zs.cols(); ++j) {
        const double s = mad(column(projected, j));
        if (!(s > 0.0)) return std::nullopt;
        scale(j) = s;
    }
    // Sphered coordinates are projected / scale; their median maps back via vec * diag(scale).
    VectorXd med(zs.cols());
    for (Eigen::Index j = 0; j < zs.cols(); ++j) med(j) = median(column(projected, j)) / scale(j);
    Scatter s;
    s.cov = vec * scale.array().square().matrix().asDiagonal() * vec.transpose();
    s.mean = vec * (scale.asDiagonal() * med);
    return s;
}

struct Concentrated {
    std::vector<std::size_t> subset;
    std::vector<double> det_history;
    double log_det = 0.0;
};

std::optional<Concentrated> concentrate(const MatrixXd& x, std::vector<std::size_t> subset, std::size_t h,
                                        const TrimOptions& options)
{
    Concentrated c;
    Scatter s = sample_scatter(x, subset);
    auto current = log_det(s.cov);
    if (!current) return std::nullopt;

    for (std::size_t step = 0; step < options.max_steps; ++step) {
        const auto d = distances(x, s);
        if (!d) return std::nullopt;
        std::vector<std::size_t> next = smallest(*d, h);
        const bool same = next == subset;
        const Scatter ns = sample_scatter(x, next);
        const auto nd = log_det(ns.cov);
        if (!nd) return std::nullopt;
        // The determinant cannot increase mathematically; a rounding-level
        // increase means the fixed point has been reached.
        if (same || *nd > *current) {
            if (c.det_history.empty()) c.det_history.push_back(std::exp(*current));
            break;
        }
        const bool converged = *current - *nd < -std::log1p(-options.relative_tolerance);
        subset = std::move(next);
        s = ns;
        if (c.det_history.empty()) c.det_history.push_back(std::exp(*current));
        current = nd;
        c.det_history.push_back(std::exp(*current));
        if (converged) break;
    }
    c.subset = std::move(subset);
    c.log_det = *current;
    return c;
}

}  // namespace

Eigen::MatrixXd feature_matrix(std::span<const CollocationRecord> records)
{
    MatrixXd x(static_cast<Eigen::Index>(records.size()), 2 * static_cast<Eigen::Index>(kTagCount));
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = 0; j < kTagCount; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * j)) = records[i].vel[j].real();
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * j + 1)) = records[i].vel[j].imag();
        }
    }
    return x;
}

std::size_t trimmed_size(std::size_t n, double fraction)
{
    return static_cast<std::size_t>(std::ceil((1.0 - fraction) * static_cast<double>(n) - 1e-9));
}

double covariance_determinant(const Eigen::MatrixXd& x, std::span<const std::size_t> subset)
{
    return sample_scatter(x, subset).cov.determinant();
}

std::vector<std::size_t> c_step(const Eigen::MatrixXd& x, std::span<const std::size_t> subset, std::size_t h)
{
    const auto d = distances(x, sample_scatter(x, subset));
    if (!d) throw Error(ErrorCode::SingularCovariance, "subset covariance is singular");
    return smallest(*d, h);
}

TrimResult trim_outliers(const Eigen::MatrixXd& x, const TrimOptions& options)
{
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const std::size_t p = static_cast<std::size_t>(x.cols());
    if (!(options.fraction > 0.0 && options.fraction < 0.5)) {
        throw Error(ErrorCode::InvalidArgument, "trim fraction must lie in (0, 0.5)");
    }
    if (n < 3 * p) {
        throw Error(ErrorCode::TooFewRecords,
                    "need at least " + std::to_string(3 * p) + " rows, got " + std::to_string(n));
    }
    if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, "non-finite feature");

    const MatrixXd z = invariant_coordinates(x);
    MatrixXd zs(z.rows(), z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const auto c = column(z, j);
        const double scale = mad(c);
        if (!(scale > 0.0)) throw Error(ErrorCode::SingularCovariance, "zero robust scale");
        zs.col(j) = (z.col(j).array() - median(c)) / scale;
    }

    const std::size_t h = trimmed_size(n, options.fraction);
    const std::size_t h0 = (n + 1) / 2;

    std::optional<Concentrated> best;
    std::size_t best_start = 0;
    const auto shapes = initial_scatters(zs);
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        const auto start = orthogonalize(zs, shapes[k]);
        if (!start) continue;
        const auto d = distances(zs, *start);
        if (!d) continue;
        // The half-sample start is lifted to an h-subset by one C-step, so the
        // determinant history compares equal-size subsets only.
        std::vector<std::size_t> lifted;
        try {
            lifted = c_step(x, smallest(*d, h0), h);
        } catch (const Error&) {
            continue;
        }
        auto refined = concentrate(x, std::move(lifted), h, options);
        if (!refined) continue;
        if (!best || refined->log_det < best->log_det) {
            best = std::move(refined);
            best_start = k;
        }
    }
    if (!best) throw Error(ErrorCode::SingularCovariance, "no start produced a nonsingular subset");

    TrimResult r;
    r.h = h;
    r.kept = std::move(best->subset);
    r.det_history = std::move(best->det_history);
    r.start = best_start;
    r.flagged.reserve(n - h);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (next < r.kept.size() && r.kept[next] == i) {
            ++next;
        } else {
            r.flagged.push_back(i);
        }
    }
    return r;
}

TrimResult trim_outliers(std::span<const CollocationRecord> records, const TrimOptions& options)
{
    return trim_outliers(feature_matrix(records), options);
}

}  // namespace infers
