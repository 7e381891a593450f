#include "infers/moments.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "infers/error.hpp"

namespace infers {

const Matrix6& MomentSet::matrix(Component c) const
{
    switch (c) {
    case Component::U: return cov_u;
    case Component::V: return cov_v;
    case Component::Joint: break;
    }
    return cov_joint;
}

namespace {

template <typename IndexFn>
MomentSet accumulate(std::size_t n, IndexFn&& at)
{
    if (n < 2) throw Error(ErrorCode::EmptySubset, "need at least 2 records, got " + std::to_string(n));

    Eigen::Matrix<double, 6, 1> su = Eigen::Matrix<double, 6, 1>::Zero();
    Eigen::Matrix<double, 6, 1> sv = Eigen::Matrix<double, 6, 1>::Zero();
    for (std::size_t k = 0; k < n; ++k) {
        const CollocationRecord& r = at(k);
        for (std::size_t j = 0; j < kTagCount; ++j) {
            const double u = r.vel[j].real();
            const double v = r.vel[j].imag();
            if (!std::isfinite(u) || !std::isfinite(v)) {
                throw Error(ErrorCode::NonFiniteInput, "record " + std::to_string(k));
            }
            su[j] += u;
            sv[j] += v;
        }
    }
    const double dn = static_cast<double>(n);
    const Eigen::Matrix<double, 6, 1> mu = su / dn;
    const Eigen::Matrix<double, 6, 1> mv = sv / dn;

    Matrix6 cu = Matrix6::Zero();
    Matrix6 cv = Matrix6::Zero();
    Eigen::Matrix<double, 6, 1> du, dv;
    for (std::size_t k = 0; k < n; ++k) {
        const CollocationRecord& r = at(k);
        for (std::size_t j = 0; j < kTagCount; ++j) {
            du[j] = r.vel[j].real() - mu[j];
            dv[j] = r.vel[j].imag() - mv[j];
        }
        cu.selfadjointView<Eigen::Upper>().rankUpdate(du);
        cv.selfadjointView<Eigen::Upper>().rankUpdate(dv);
    }

    MomentSet m;
    m.n = n;
    for (std::size_t j = 0; j < kTagCount; ++j) m.mean[j] = Velocity(mu[j], mv[j]);
    m.cov_u = Matrix6(cu.selfadjointView<Eigen::Upper>()) / (dn - 1.0);
    m.cov_v = Matrix6(cv.selfadjointView<Eigen::Upper>()) / (dn - 1.0);
    m.cov_joint = m.cov_u + m.cov_v;
    return m;
}

}  // namespace

MomentSet compute_moments(std::span<const CollocationRecord> records)
{
    return accumulate(records.size(), [&](std::size_t k) -> const CollocationRecord& { return records[k]; });
}

MomentSet compute_moments(std::span<const CollocationRecord> records,
                          std::span<const std::size_t> subset)
{
    for (std::size_t idx : subset) {
        if (idx >= records.size()) throw Error(ErrorCode::InvalidArgument, "subset index out of range");
    }
    return accumulate(subset.size(),
                      [&](std::size_t k) -> const CollocationRecord& { return records[subset[k]]; });
}

double correlation(const MomentSet& m, Tag a, Tag b, Component c)
{
    const double va = m.var(a, c);
    const double vb = m.var(b, c);
    if (!(va > 0.0) || !(vb > 0.0)) {
        throw Error(ErrorCode::DegenerateVariance,
                    "correlation " + std::string(tag_name(a)) + "," + std::string(tag_name(b)));
    }
    return m.cov(a, b, c) / std::sqrt(va * vb);
}

}  // namespace infers
