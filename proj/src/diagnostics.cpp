#include "infers/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "infers/error.hpp"

namespace infers {

double snr_db(double signal_var, double noise_var)
{
    if (!(signal_var > 0.0)) return -kSnrCapDb;
    if (!(noise_var > 0.0)) return kSnrCapDb;
    return std::clamp(10.0 * std::log10(signal_var / noise_var), -kSnrCapDb, kSnrCapDb);
}

FitDiagnostics diagnostics(const InfersParams& p, const MomentSet& m)
{
    if (!is_feasible(p)) throw Error(ErrorCode::InfeasibleParams, "diagnostics need feasible parameters");

    const Matrix6 L = propagation_matrix(p.lambda);
    const std::array<double, 2> truth{p.sigma_t2_u, p.sigma_t2_v};
    const std::array<Component, 2> comps{Component::U, Component::V};

    // Individual error variance per tag and component.  Tags are visited in
    // model order, so every propagated term is already split.
    std::array<std::array<double, 2>, kTagCount> err{};
    for (std::size_t x = 0; x < kTagCount; ++x) {
        std::array<double, 2> unexplained{};
        for (int c = 0; c < 2; ++c) {
            double r = m.matrix(comps[c])(x, x) - p.beta[x] * p.beta[x] * truth[c];
            for (std::size_t j = 0; j < x; ++j) r -= L(x, j) * L(x, j) * err[j][c];
            unexplained[c] = std::max(r, 0.0);
        }
        const double total = unexplained[0] + unexplained[1];
        const double share_u = total > 0.0 ? unexplained[0] / total : 0.5;
        err[x][0] = p.sigma2[x] * share_u;
        err[x][1] = p.sigma2[x] - err[x][0];
    }

    FitDiagnostics d;
    const double shared_fraction = std::clamp(p.lambda_of(Tag::N), 0.0, 1.0);
    for (std::size_t x = 0; x < kTagCount; ++x) {
        for (int c = 0; c < 2; ++c) {
            ComponentDiagnostics& out = d.per_tag[x][c];
            double err_total = 0.0;
            for (std::size_t j = 0; j < kTagCount; ++j) err_total += L(x, j) * L(x, j) * err[j][c];
            const double signal = p.beta[x] * p.beta[x] * truth[c];

            out.sigma_total = std::sqrt(m.matrix(comps[c])(x, x));
            out.sigma_truth = std::sqrt(signal);
            out.sigma_err_total = std::sqrt(err_total);
            if (x == index(Tag::I)) {
                // Drifter error splits into the shared part lN eI and the rest.
                out.err_var_indiv = (1.0 - shared_fraction) * err[x][c];
            } else {
                out.err_var_indiv = err[x][c];
            }
            out.sigma_err_indiv = std::sqrt(out.err_var_indiv);
            out.corr_truth = out.sigma_total > 0.0
                                 ? std::clamp(std::copysign(out.sigma_truth, p.beta[x]) / out.sigma_total, -1.0, 1.0)
                                 : 0.0;
            out.snr_db = snr_db(signal, err_total);
        }
    }

    d.min_envelope_corr_u = 2.0;
    d.min_envelope_corr_v = 2.0;
    for (std::size_t a = 0; a < kAnalysisTags.size(); ++a) {
        for (std::size_t b = a + 1; b < kAnalysisTags.size(); ++b) {
            const Tag ta = kAnalysisTags[a];
            const Tag tb = kAnalysisTags[b];
            const double cu = correlation(m, ta, tb, Component::U);
            const double cv = correlation(m, ta, tb, Component::V);
            if (cu < d.min_envelope_corr_u) {
                d.min_envelope_corr_u = cu;
                d.min_envelope_pair_u = {ta, tb};
            }
            if (cv < d.min_envelope_corr_v) {
                d.min_envelope_corr_v = cv;
                d.min_envelope_pair_v = {ta, tb};
            }
        }
    }
    return d;
}

}  // namespace infers
