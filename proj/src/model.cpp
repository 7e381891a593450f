#include "infers/model.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "infers/error.hpp"

namespace infers {

namespace {

constexpr double kSingularTol = 1e-14;
// |lambda| below this is treated as zero when dividing out a parent factor.
constexpr double kLambdaZeroTol = 1e-9;

struct Solve2 {
    double first;
    double second;
};

// Solves [a11 a12; a21 a22] x = b by Cramer's rule.
Solve2 solve2x2(double a11, double a12, double a21, double a22, double b1, double b2)
{
    const double det = a11 * a22 - a12 * a21;
    const double scale = std::abs(a11 * a22) + std::abs(a12 * a21);
    if (!(scale > 0.0) || !(std::abs(det) >= kSingularTol * scale)) {
        throw Error(ErrorCode::SingularSystem, "2x2 calibration system is singular");
    }
    return {(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det};
}

}  // namespace

bool is_feasible(const InfersParams& p)
{
    if (!(p.sigma_t2 >= 0.0) || !(p.sigma_t2_u >= 0.0) || !(p.sigma_t2_v >= 0.0)) return false;
    return std::all_of(p.sigma2.begin(), p.sigma2.end(), [](double s) { return s >= 0.0; });
}

Matrix6 propagation_matrix(const std::array<double, kTagCount>& lambda)
{
    Matrix6 L = Matrix6::Identity();
    const auto row = [](Tag t) { return static_cast<Eigen::Index>(index(t)); };
    L(row(Tag::N), row(Tag::I)) = lambda[index(Tag::N)];
    L.row(row(Tag::F)) += lambda[index(Tag::F)] * L.row(row(Tag::N));
    L.row(row(Tag::E)) += lambda[index(Tag::E)] * L.row(row(Tag::F));
    L.row(row(Tag::R)) += lambda[index(Tag::R)] * L.row(row(Tag::N));
    L.row(row(Tag::S)) += lambda[index(Tag::S)] * L.row(row(Tag::R));
    return L;
}

Matrix6 model_covariance(double sigma_t2, const std::array<double, kTagCount>& beta,
                         const std::array<double, kTagCount>& lambda,
                         const std::array<double, kTagCount>& sigma2)
{
    const Eigen::Map<const Eigen::Matrix<double, 6, 1>> b(beta.data());
    const Eigen::Map<const Eigen::Matrix<double, 6, 1>> d(sigma2.data());
    const Matrix6 L = propagation_matrix(lambda);
    return sigma_t2 * b * b.transpose() + L * d.asDiagonal() * L.transpose();
}

MomentSet forward_moments(const InfersParams& p, double error_share_u)
{
    std::array<double, kTagCount> err_u{};
    std::array<double, kTagCount> err_v{};
    for (std::size_t j = 0; j < kTagCount; ++j) {
        err_u[j] = p.sigma2[j] * error_share_u;
        err_v[j] = p.sigma2[j] - err_u[j];
    }
    MomentSet m;
    m.n = 0;
    m.cov_u = model_covariance(p.sigma_t2_u, p.beta, p.lambda, err_u);
    m.cov_v = model_covariance(p.sigma_t2_v, p.beta, p.lambda, err_v);
    m.cov_joint = m.cov_u + m.cov_v;
    // Truth has zero mean, so each sample's mean is its additive calibration.
    m.mean = p.alpha;
    m.mean[index(Tag::I)] = Velocity{};
    return m;
}

SharedError solve_shared_error(const MomentSet& m, double sigma_t2, double beta_N)
{
    const double var_i = m.var(Tag::I);
    if (!(var_i > 0.0)) throw Error(ErrorCode::DegenerateVariance, "Var(I) <= 0");
    if (!(sigma_t2 >= 0.0) || !(sigma_t2 < var_i)) {
        throw Error(ErrorCode::InvalidArgument, "true variance outside [0, Var(I))");
    }
    if (!(beta_N > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta_N must be positive");

    SharedError s;
    s.sigma2_I = var_i - sigma_t2;
    s.lambda_N = (m.cov(Tag::I, Tag::N) - beta_N * sigma_t2) / s.sigma2_I;
    s.sigma2_N = s.sigma2_I * (beta_N * beta_N - s.lambda_N * s.lambda_N);
    return s;
}

InfersParams strong_solve(const MomentSet& m, double sigma_t2, double beta_N)
{
    const SharedError shared = solve_shared_error(m, sigma_t2, beta_N);
    const double s = sigma_t2;
    const double lambda_n = shared.lambda_N;
    const double shared_i = lambda_n * shared.sigma2_I;
    // Variance of the nowcast's total error, lN^2 sI^2 + sN^2.
    const double err_n = lambda_n * shared_i + shared.sigma2_N;

    InfersParams p;
    p.sigma_t2 = s;
    p.beta[index(Tag::N)] = beta_N;
    p.lambda[index(Tag::N)] = lambda_n;
    p.sigma2[index(Tag::I)] = shared.sigma2_I;
    p.sigma2[index(Tag::N)] = shared.sigma2_N;

    // Cov(I,X) = bX s + cX lN sI^2 and Cov(N,X) = bN bX s + cX errN, where cX
    // is the product of propagation factors linking X to the nowcast error.
    const auto calibrate = [&](Tag x) {
        return solve2x2(s, shared_i, beta_N * s, err_n, m.cov(Tag::I, x), m.cov(Tag::N, x));
    };

    for (Tag x : {Tag::F, Tag::R}) {
        const auto [b, l] = calibrate(x);
        p.beta[index(x)] = b;
        p.lambda[index(x)] = l;
        p.sigma2[index(x)] = m.var(x) - b * b * s - l * l * err_n;
    }

    for (auto [y, parent] : {std::pair{Tag::E, Tag::F}, std::pair{Tag::S, Tag::R}}) {
        const auto [b, mu] = calibrate(y);
        const double lp = p.lambda_of(parent);
        double l = 0.0;
        if (std::abs(lp) > kLambdaZeroTol) {
            l = mu / lp;
        } else if (std::abs(mu) > kLambdaZeroTol) {
            throw Error(ErrorCode::LambdaParentZero,
                        "lambda_" + std::string(tag_name(parent)) + " is zero");
        }
        const double err_parent = lp * lp * err_n + p.sigma2_of(parent);
        p.beta[index(y)] = b;
        p.lambda[index(y)] = l;
        p.sigma2[index(y)] = m.var(y) - b * b * s - l * l * err_parent;
    }

    const Velocity mean_i = m.mean_of(Tag::I);
    for (Tag x : kAnalysisTags) p.alpha[index(x)] = m.mean_of(x) - p.beta_of(x) * mean_i;

    const double denom = beta_N - lambda_n;
    if (!(std::abs(denom) > 1e-12 * beta_N)) {
        throw Error(ErrorCode::DegenerateCalibration, "beta_N equals lambda_N");
    }
    p.sigma_t2_u = (m.cov(Tag::I, Tag::N, Component::U) - lambda_n * m.var(Tag::I, Component::U)) / denom;
    p.sigma_t2_v = (m.cov(Tag::I, Tag::N, Component::V) - lambda_n * m.var(Tag::I, Component::V)) / denom;
    return p;
}

std::array<double, kPairCount> autocov_residuals(const MomentSet& m, const InfersParams& p)
{
    const Matrix6 model = model_covariance(p.sigma_t2, p.beta, p.lambda, p.sigma2);
    std::array<double, kPairCount> r{};
    for (std::size_t k = 0; k < kPairCount; ++k) {
        const auto [a, b] = kAutocovPairs[k];
        r[k] = std::abs(m.cov(a, b) - model(index(a), index(b)));
    }
    return r;
}

std::vector<std::size_t> local_minima(const std::vector<double>& curve)
{
    // Dips smaller than this fraction of the curve's largest value are
    // rounding noise on a flat curve, not minima.
    constexpr double kFlatTolerance = 1e-12;
    double scale = 0.0;
    for (double v : curve) {
        if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
    }
    const double tol = kFlatTolerance * scale;
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        const double l = curve[i - 1];
        const double c = curve[i];
        const double r = curve[i + 1];
        if (std::isnan(l) || std::isnan(c) || std::isnan(r)) continue;
        if (c < l - tol && c < r - tol) out.push_back(i);
    }
    return out;
}

ResidualCurves residual_curves(const MomentSet& m, double beta_N, std::size_t grid_size, unsigned workers)
{
    if (grid_size < kMinGridSize) {
        throw Error(ErrorCode::InvalidArgument,
                    "grid size " + std::to_string(grid_size) + " below " + std::to_string(kMinGridSize));
    }
    const double var_i = m.var(Tag::I);
    if (!(var_i > 0.0)) throw Error(ErrorCode::DegenerateVariance, "Var(I) <= 0");

    ResidualCurves c;
    c.beta_N = beta_N;
    c.grid.resize(grid_size);
    for (std::size_t g = 0; g < grid_size; ++g) {
        c.grid[g] = var_i * static_cast<double>(g) / static_cast<double>(grid_size - 1);
    }
    c.grid.back() = var_i;
    for (auto& r : c.residual) r.assign(grid_size, std::numeric_limits<double>::quiet_NaN());
    // vector<bool> is not safe for concurrent writes to neighbouring bits.
    std::vector<char> feasible(grid_size, 0);

    const auto evaluate = [&](std::size_t begin, std::size_t end) {
        for (std::size_t g = begin; g < end; ++g) {
            try {
                const InfersParams p = strong_solve(m, c.grid[g], beta_N);
                const auto r = autocov_residuals(m, p);
                for (std::size_t k = 0; k < kPairCount; ++k) c.residual[k][g] = r[k];
                feasible[g] = is_feasible(p) ? 1 : 0;
            } catch (const Error&) {
                // Missing point: residuals stay NaN and the point is infeasible.
            }
        }
    };

    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(grid_size)));
    if (workers == 1) {
        evaluate(0, grid_size);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (grid_size + workers - 1) / workers;
        for (std::size_t begin = 0; begin < grid_size; begin += chunk) {
            pool.emplace_back(evaluate, begin, std::min(grid_size, begin + chunk));
        }
    }

    c.feasible.assign(feasible.begin(), feasible.end());
    for (std::size_t k = 0; k < kPairCount; ++k) c.minima[k] = local_minima(c.residual[k]);
    return c;
}

namespace {

bool feasible_at(const MomentSet& m, double sigma_t2, double beta_N, InfersParams* out = nullptr)
{
    try {
        InfersParams p = strong_solve(m, sigma_t2, beta_N);
        const bool ok = is_feasible(p);
        if (ok && out != nullptr) *out = p;
        return ok;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

Choice choose_solution(const ResidualCurves& curves, const MomentSet& m)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& mins : curves.minima) {
        for (std::size_t g : mins) {
            sum += curves.grid.at(g);
            ++count;
        }
    }
    if (count == 0) throw Error(ErrorCode::NoMinimaFound, "no autocovariance minima on the grid");

    Choice choice;
    choice.target = sum / static_cast<double>(count);
    if (feasible_at(m, choice.target, curves.beta_N, &choice.params)) {
        choice.chosen = choice.target;
        choice.target_feasible = true;
        return choice;
    }

    const std::size_t size = curves.size();
    std::optional<std::size_t> nearest;
    for (std::size_t g = 0; g < size; ++g) {
        if (!curves.feasible[g]) continue;
        if (!nearest || std::abs(curves.grid[g] - choice.target) < std::abs(curves.grid[*nearest] - choice.target)) {
            nearest = g;
        }
    }
    if (!nearest) throw Error(ErrorCode::NoFeasibleRegion, "no feasible true variance on the grid");

    // Walk from the nearest feasible grid point towards the target until the
    // feasibility boundary is bracketed, then bisect onto it.
    const std::size_t g = *nearest;
    double inside = curves.grid[g];
    std::optional<double> outside;
    if (curves.grid[g] < choice.target && g + 1 < size && !curves.feasible[g + 1]) {
        outside = curves.grid[g + 1];
    } else if (curves.grid[g] > choice.target && g > 0 && !curves.feasible[g - 1]) {
        outside = curves.grid[g - 1];
    }
    if (outside) {
        double out = *outside;
        for (int it = 0; it < 200 && std::abs(out - inside) > 4.0 * std::numeric_limits<double>::epsilon() * curves.grid.back(); ++it) {
            const double mid = 0.5 * (inside + out);
            if (feasible_at(m, mid, curves.beta_N)) {
                inside = mid;
            } else {
                out = mid;
            }
        }
    }
    if (!feasible_at(m, inside, curves.beta_N, &choice.params)) {
        throw Error(ErrorCode::NoFeasibleRegion, "feasible grid point failed to re-solve");
    }
    choice.chosen = inside;
    return choice;
}

}  // namespace infers
