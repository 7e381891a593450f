#pragma once

#include <array>
#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "infers/record.hpp"

namespace infers {

using Matrix6 = Eigen::Matrix<double, 6, 6>;

// Means and central second moments of a collocation subset.  The joint
// matrix is the real part of the complex (u + i v) cross-covariance, which
// is the sum of the zonal and meridional matrices.
struct MomentSet {
    std::size_t n = 0;
    std::array<Velocity, kTagCount> mean{};
    Matrix6 cov_joint = Matrix6::Zero();
    Matrix6 cov_u = Matrix6::Zero();
    Matrix6 cov_v = Matrix6::Zero();

    const Matrix6& matrix(Component c) const;

    double var(Tag a, Component c = Component::Joint) const { return cov(a, a, c); }
    double cov(Tag a, Tag b, Component c = Component::Joint) const
    {
        return matrix(c)(index(a), index(b));
    }
    const Velocity& mean_of(Tag t) const { return mean[index(t)]; }
};

// Unbiased (n - 1) sample moments.  Throws EmptySubset for n < 2 and
// NonFiniteInput when any velocity is NaN or infinite.
MomentSet compute_moments(std::span<const CollocationRecord> records);
MomentSet compute_moments(std::span<const CollocationRecord> records,
                          std::span<const std::size_t> subset);

// Pearson correlation from the requested matrix; DegenerateVariance when
// either variance is not positive.
double correlation(const MomentSet& m, Tag a, Tag b, Component c = Component::Joint);

}  // namespace infers
