#pragma once

#include <array>

#include "infers/model.hpp"

namespace infers {

// Reported SNR is clamped to +/- this many dB so infinities never leave the library.
inline constexpr double kSnrCapDb = 99.0;

// Standard deviations (m/s) and derived statistics of one sample and one
// velocity component.
struct ComponentDiagnostics {
    double sigma_total = 0.0;      // sqrt of the sample variance
    double sigma_truth = 0.0;      // |beta| * sigma_t of this component
    double sigma_err_total = 0.0;  // shared plus individual error
    double sigma_err_indiv = 0.0;  // individual (unshared) error
    double err_var_indiv = 0.0;    // individual error variance (m^2/s^2) after the u/v split
    double corr_truth = 0.0;
    double snr_db = 0.0;
};

struct FitDiagnostics {
    // [tag][0 = u, 1 = v]
    std::array<std::array<ComponentDiagnostics, 2>, kTagCount> per_tag{};
    double min_envelope_corr_u = 0.0;
    double min_envelope_corr_v = 0.0;
    std::array<Tag, 2> min_envelope_pair_u{Tag::N, Tag::N};
    std::array<Tag, 2> min_envelope_pair_v{Tag::N, Tag::N};

    const ComponentDiagnostics& at(Tag t, Component c) const
    {
        return per_tag[index(t)][c == Component::V ? 1 : 0];
    }
};

// Minimum correlation among the analysis samples (N, F, E, R, S) below which
// the lagged samples are suspect.
inline constexpr double kEnvelopeThreshold = 0.7;

// Per-component diagnostics.  Joint error variances are apportioned to u and v
// in proportion to each component's unexplained variance (clamped at zero),
// so the split always sums back to the joint value.  Throws InfeasibleParams
// for parameters with a negative variance.
FitDiagnostics diagnostics(const InfersParams& p, const MomentSet& m);

// 10 log10(signal / noise) clamped to [-kSnrCapDb, kSnrCapDb].
double snr_db(double signal_var, double noise_var);

}  // namespace infers
