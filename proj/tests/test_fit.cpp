#include <gtest/gtest.h>

#include "infers/error.hpp"
#include "infers/fit.hpp"
#include "infers/simulator.hpp"
#include "support.hpp"

using namespace infers;

TEST(Fit, RunsEndToEnd)
{
    const auto recs = simulate(testing_support::reference_config(2000, 31));
    const auto r = fit(recs);
    EXPECT_EQ(r.n_input, 2000u);
    EXPECT_EQ(r.n_used, 1800u);
    ASSERT_TRUE(r.trim.has_value());
    EXPECT_TRUE(is_feasible(r.params));
    EXPECT_EQ(r.chosen, r.params.sigma_t2);
    EXPECT_GE(r.chosen, 0.0);
    EXPECT_LE(r.chosen, r.moments.var(Tag::I));
    EXPECT_EQ(r.curves.size(), 2000u);
}

TEST(Fit, Deterministic)
{
    const auto recs = simulate(testing_support::reference_config(1000, 32));
    FitOptions opts;
    const auto a = fit(recs, opts);
    opts.workers = 3;
    const auto b = fit(recs, opts);
    EXPECT_EQ(a.chosen, b.chosen);
    EXPECT_EQ(a.params.lambda, b.params.lambda);
}

TEST(Fit, TooSmall)
{
    const auto recs = simulate(testing_support::reference_config(105, 33));
    try {
        fit(recs);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SubsetTooSmall);
    }
    FitOptions opts;
    opts.trim_fraction = 0.0;
    EXPECT_NO_THROW(fit(recs, opts));
}

TEST(Fit, WarnsBelowRecommendedSize)
{
    FitOptions opts;
    opts.trim_fraction = 0.0;
    const auto r = fit(simulate(testing_support::reference_config(300, 34)), opts);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Fit, IdentityCollocationHasNoSolution)
{
    auto recs = simulate(testing_support::reference_config(500, 35));
    for (auto& r : recs) r.vel.fill(r[Tag::I]);
    try {
        fit(recs);
        FAIL();
    } catch (const FitFailure& f) {
        EXPECT_TRUE(f.code() == ErrorCode::NoMinimaFound || f.code() == ErrorCode::DegenerateVariance);
        EXPECT_EQ(f.curves().size(), 2000u);
    }
}

TEST(Fit, RecoversSharedErrorFraction)
{
    // Ten seeds of the reference configuration at n = 5000.
    const double truth = 0.546;
    int close = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto r = fit(simulate(testing_support::reference_config(5000, 500 + s)));
        close += std::abs(r.params.lambda_of(Tag::N) - truth) <= 0.05 ? 1 : 0;
    }
    EXPECT_GE(close, 9);
}

TEST(Fit, FromMoments)
{
    const auto cfg = testing_support::reference_config();
    const auto r = fit_moments(population_moments(cfg));
    EXPECT_FALSE(r.trim.has_value());
    EXPECT_TRUE(is_feasible(r.params));
}
