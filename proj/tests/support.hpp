#pragma once

#include <cmath>
#include <random>

#include "infers/model.hpp"
#include "infers/simulator.hpp"
#include "oracle/equations.hpp"

namespace testing_support {

using namespace infers;

// Truth mostly zonal, as in the all-collocation reference run; error
// variances put about 0.148 and 0.159 m/s of drifter error on u and v.  The
// lagged samples share the nowcast slope and keep the E-S envelope
// correlation near the reference minima (about 0.91 for u, 0.83 for v).
inline SimulationConfig reference_config(std::size_t n = 500, std::uint64_t seed = 1)
{
    SimulationConfig c;
    c.n = n;
    c.seed = seed;
    c.sigma_t2_u = 0.127 * 0.127;
    c.sigma_t2_v = 0.003 * 0.003;
    c.beta = {1.0, 0.843, 0.843, 0.843, 0.843, 0.843};
    c.lambda = {0.0, 0.546, 0.95, 0.95, 0.95, 0.95};
    const double tie = 0.843 * 0.843 - 0.546 * 0.546;
    c.sigma2_u = {0.0219, 0.0219 * tie, 0.0012, 0.0012, 0.0012, 0.0012};
    c.sigma2_v = {0.0252, 0.0252 * tie, 0.0017, 0.0017, 0.0017, 0.0017};
    return c;
}

// A feasible parameter set obeying the variance-matching tie.
inline InfersParams random_params(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    InfersParams p;
    p.sigma_t2 = in(0.005, 0.05);
    const double share = in(0.2, 0.8);
    p.sigma_t2_u = share * p.sigma_t2;
    p.sigma_t2_v = p.sigma_t2 - p.sigma_t2_u;
    for (Tag t : kAnalysisTags) {
        p.beta[index(t)] = in(0.6, 1.2);
        p.lambda[index(t)] = in(0.5, 1.0);
        p.sigma2[index(t)] = in(0.001, 0.02);
        p.alpha[index(t)] = {in(-0.1, 0.1), in(-0.1, 0.1)};
    }
    p.sigma2[index(Tag::I)] = in(0.005, 0.05);
    p.lambda[index(Tag::N)] = in(0.1, 0.9) * p.beta[index(Tag::N)];
    const double bN = p.beta[index(Tag::N)];
    const double lN = p.lambda[index(Tag::N)];
    p.sigma2[index(Tag::N)] = p.sigma2[index(Tag::I)] * (bN * bN - lN * lN);
    return p;
}

inline oracle::Model to_oracle(const InfersParams& p)
{
    auto b = [&](Tag t) { return p.beta_of(t); };
    auto l = [&](Tag t) { return p.lambda_of(t); };
    auto s = [&](Tag t) { return p.sigma2_of(t); };
    return {p.sigma_t2,
            b(Tag::N), b(Tag::F), b(Tag::E), b(Tag::R), b(Tag::S),
            l(Tag::N), l(Tag::F), l(Tag::E), l(Tag::R), l(Tag::S),
            s(Tag::I), s(Tag::N), s(Tag::F), s(Tag::E), s(Tag::R), s(Tag::S)};
}

inline double rel_err(double got, double want)
{
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace testing_support
