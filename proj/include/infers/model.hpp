#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "infers/moments.hpp"

namespace infers {

// Parameters of the six-sample measurement model
//
//   I = t + eI
//   N = aN + bN t + (lN eI + eN)
//   F = aF + bF t + lF (lN eI + eN) + eF
//   E = aE + bE t + lE (lF (lN eI + eN) + eF) + eE
//   R = aR + bR t + lR (lN eI + eN) + eR
//   S = aS + bS t + lS (lR (lN eI + eN) + eR) + eS
//
// Arrays are indexed by Tag.  The drifter is the calibration reference, so
// alpha[I] = 0 and beta[I] = 1; lambda[I] is unused and kept at 0.
struct InfersParams {
    double sigma_t2 = 0.0;
    double sigma_t2_u = 0.0;
    double sigma_t2_v = 0.0;
    std::array<Velocity, kTagCount> alpha{};
    std::array<double, kTagCount> beta{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    std::array<double, kTagCount> lambda{};
    std::array<double, kTagCount> sigma2{};

    double beta_of(Tag t) const { return beta[index(t)]; }
    double lambda_of(Tag t) const { return lambda[index(t)]; }
    double sigma2_of(Tag t) const { return sigma2[index(t)]; }
    const Velocity& alpha_of(Tag t) const { return alpha[index(t)]; }
};

// Non-negativity of the true variance (joint and both components) and of
// all six error variances.
bool is_feasible(const InfersParams& p);

// Row X, column j: coefficient of the individual error e_j in the total
// error of sample X.
Matrix6 propagation_matrix(const std::array<double, kTagCount>& lambda);

// Population covariance sigma_t2 * beta beta^T + L diag(sigma2) L^T.
Matrix6 model_covariance(double sigma_t2, const std::array<double, kTagCount>& beta,
                         const std::array<double, kTagCount>& lambda,
                         const std::array<double, kTagCount>& sigma2);

// Population moments of the model (n = 0 marks a population MomentSet).
// Truth splits into components by sigma_t2_u / sigma_t2_v; every error
// variance is split with the fraction `error_share_u` going to u.
MomentSet forward_moments(const InfersParams& p, double error_share_u = 0.5);

// Steps 1-3 of the strong-constraint cascade, valid for any
// 0 <= sigma_t2 < Var(I).
struct SharedError {
    double sigma2_I = 0.0;
    double lambda_N = 0.0;
    double sigma2_N = 0.0;
};
SharedError solve_shared_error(const MomentSet& m, double sigma_t2, double beta_N);

// Closed-form solution of the variance and I/N covariance equations for a
// given true variance and nowcast slope.  Negative variances are returned
// as computed; use is_feasible() to classify.
InfersParams strong_solve(const MomentSet& m, double sigma_t2, double beta_N);

// The six autocovariance equations among F, E, R, S.
enum class AutocovPair : std::size_t { FE = 0, FR, FS, ER, ES, RS };
inline constexpr std::size_t kPairCount = 6;
inline constexpr std::array<std::array<Tag, 2>, kPairCount> kAutocovPairs{{
    {Tag::F, Tag::E}, {Tag::F, Tag::R}, {Tag::F, Tag::S},
    {Tag::E, Tag::R}, {Tag::E, Tag::S}, {Tag::R, Tag::S},
}};

// |sample covariance - model covariance| for each autocovariance pair.
std::array<double, kPairCount> autocov_residuals(const MomentSet& m, const InfersParams& p);

// Weak-constraint residuals over a uniform grid of candidate true variance.
// Missing values (strong_solve failed at that grid point) are NaN.
struct ResidualCurves {
    double beta_N = 0.0;
    std::vector<double> grid;
    std::array<std::vector<double>, kPairCount> residual;
    std::vector<bool> feasible;
    std::array<std::vector<std::size_t>, kPairCount> minima;  // grid indices
    std::optional<double> target;
    std::optional<double> chosen;

    std::size_t size() const { return grid.size(); }
    double step() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

inline constexpr std::size_t kMinGridSize = 100;

// Grid spans [0, Var(I)] inclusive.  Workers > 1 evaluate disjoint slices of
// the grid; the result does not depend on the worker count.
ResidualCurves residual_curves(const MomentSet& m, double beta_N, std::size_t grid_size,
                               unsigned workers = 1);

// Strict interior local minima, ignoring points whose neighbours are missing.
std::vector<std::size_t> local_minima(const std::vector<double>& curve);

struct Choice {
    double target = 0.0;
    double chosen = 0.0;
    bool target_feasible = false;
    InfersParams params;
};

// Averages all local minima (pooled over the six curves) into a target true
// variance.  When the target is infeasible, moves to the nearest feasible grid
// point and then onto the feasibility boundary between it and its infeasible
// neighbour.
Choice choose_solution(const ResidualCurves& curves, const MomentSet& m);

}  // namespace infers
