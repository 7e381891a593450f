#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>

#include "infers/error.hpp"
#include "infers/robust.hpp"
#include "infers/simulator.hpp"
#include "support.hpp"

using namespace infers;

namespace {

std::vector<double> mahalanobis(const Eigen::MatrixXd& x, const std::vector<std::size_t>& subset)
{
    Eigen::MatrixXd sub(subset.size(), x.cols());
    for (std::size_t i = 0; i < subset.size(); ++i) sub.row(i) = x.row(subset[i]);
    const Eigen::RowVectorXd mu = sub.colwise().mean();
    const Eigen::MatrixXd c = sub.rowwise() - mu;
    const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(subset.size() - 1);
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    std::vector<double> d(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Eigen::VectorXd z = llt.matrixL().solve((x.row(i) - mu).transpose());
        d[i] = z.squaredNorm();
    }
    return d;
}

// Clean records plus `bad` gross outliers with every sample at ten times the
// clean standard deviation in a random direction.
std::vector<CollocationRecord> contaminated(std::size_t n, std::size_t bad, std::uint64_t seed,
                                            std::vector<std::size_t>& planted)
{
    auto cfg = testing_support::reference_config(n, seed);
    auto recs = simulate(cfg);
    const double sd = std::sqrt(population_moments(cfg).var(Tag::I));
    std::mt19937_64 rng(seed * 7919 + 1);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    planted.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(bad));
    std::sort(planted.begin(), planted.end());
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.141592653589793);
    for (std::size_t i : planted) {
        for (auto& v : recs[i].vel) v = std::polar(10.0 * sd, angle(rng));
    }
    return recs;
}

}  // namespace

TEST(Robust, TrimmedSize)
{
    EXPECT_EQ(trimmed_size(500, 0.10), 450u);
    EXPECT_EQ(trimmed_size(501, 0.10), 451u);
    EXPECT_EQ(trimmed_size(10, 0.25), 8u);
}

TEST(Robust, PartitionAndOrdering)
{
    const auto recs = simulate(testing_support::reference_config(500, 12));
    const auto r = trim_outliers(recs);
    EXPECT_EQ(r.h, 450u);
    EXPECT_EQ(r.kept.size(), 450u);
    EXPECT_EQ(r.flagged.size(), 50u);
    std::vector<std::size_t> all = r.kept;
    all.insert(all.end(), r.flagged.begin(), r.flagged.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
    EXPECT_TRUE(std::is_sorted(r.kept.begin(), r.kept.end()));

    const auto x = feature_matrix(recs);
    const auto d = mahalanobis(x, r.kept);
    std::vector<double> kept_d;
    for (auto i : r.kept) kept_d.push_back(d[i]);
    std::nth_element(kept_d.begin(), kept_d.begin() + kept_d.size() / 2, kept_d.end());
    const double median = kept_d[kept_d.size() / 2];
    for (auto i : r.flagged) EXPECT_GE(d[i], median);
}

TEST(Robust, DeterminantMonotoneAndBelowFull)
{
    const auto recs = simulate(testing_support::reference_config(400, 13));
    const auto x = feature_matrix(recs);
    const auto r = trim_outliers(x);
    ASSERT_FALSE(r.det_history.empty());
    for (std::size_t i = 1; i < r.det_history.size(); ++i) EXPECT_LE(r.det_history[i], r.det_history[i - 1]);
    std::vector<std::size_t> all(x.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    EXPECT_LE(covariance_determinant(x, r.kept), covariance_determinant(x, all));
}

TEST(Robust, FixedPointIsIdempotent)
{
    const auto x = feature_matrix(simulate(testing_support::reference_config(300, 14)));
    const auto r = trim_outliers(x);
    EXPECT_EQ(c_step(x, r.kept, r.h), r.kept);
}

TEST(Robust, PlantedOutliersAreFlagged)
{
    std::vector<std::size_t> planted;
    const auto recs = contaminated(500, 25, 3, planted);
    const auto r = trim_outliers(recs);
    std::size_t hit = 0;
    for (auto i : planted) hit += std::binary_search(r.flagged.begin(), r.flagged.end(), i) ? 1 : 0;
    EXPECT_GE(hit, 23u);
}

TEST(Robust, AffineEquivariance)
{
    const auto x = feature_matrix(simulate(testing_support::reference_config(300, 15)));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(12, 12);
    for (Eigen::Index i = 0; i < 12; ++i) {
        for (Eigen::Index j = 0; j < 12; ++j) a(i, j) = g(rng);
    }
    Eigen::RowVectorXd shift(12);
    for (Eigen::Index j = 0; j < 12; ++j) shift(j) = g(rng);
    const Eigen::MatrixXd y = (x * a.transpose()).rowwise() + shift;
    EXPECT_EQ(trim_outliers(x).kept, trim_outliers(y).kept);
}

TEST(Robust, Deterministic)
{
    const auto x = feature_matrix(simulate(testing_support::reference_config(300, 16)));
    const auto a = trim_outliers(x);
    const auto b = trim_outliers(x);
    EXPECT_EQ(a.kept, b.kept);
    EXPECT_EQ(a.start, b.start);
}

TEST(Robust, Errors)
{
    std::vector<CollocationRecord> same(100);
    for (auto& r : same) r.vel.fill({0.1, 0.2});
    try {
        trim_outliers(same);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularCovariance);
    }
    const auto few = simulate(testing_support::reference_config(30, 1));
    try {
        trim_outliers(few);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooFewRecords);
    }
    const auto ok = simulate(testing_support::reference_config(100, 1));
    for (double f : {0.0, 0.5, -0.1}) {
        try {
            trim_outliers(ok, TrimOptions{f});
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
        }
    }
}
