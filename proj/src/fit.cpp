#include "infers/fit.hpp"

#include <cstdio>

#include "infers/error.hpp"

namespace infers {

FitFailure::FitFailure(const Error& cause, ResidualCurves curves, std::vector<std::string> warnings)
    : Error(cause.code(), cause.what()), curves_(std::move(curves)), warnings_(std::move(warnings))
{
}

namespace {

std::string fixed(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

void solve_from_moments(FitResult& r, const FitOptions& options)
{
    const MomentSet& m = r.moments;
    const double beta_n = variance_match(m);
    r.curves = residual_curves(m, beta_n, options.grid_size, options.workers);

    Choice choice;
    try {
        choice = choose_solution(r.curves, m);
    } catch (const Error& e) {
        throw FitFailure(e, r.curves, r.warnings);
    }
    r.params = choice.params;
    r.target = choice.target;
    r.chosen = choice.chosen;
    r.on_boundary = !choice.target_feasible;
    r.curves.target = choice.target;
    r.curves.chosen = choice.chosen;
    if (r.on_boundary) {
        r.warnings.push_back("target true variance " + fixed(choice.target) +
                             " is infeasible; chosen solution lies on the feasibility boundary");
    }

    r.diagnostics = diagnostics(r.params, m);
    if (r.diagnostics.min_envelope_corr_u < options.envelope_threshold ||
        r.diagnostics.min_envelope_corr_v < options.envelope_threshold) {
        r.warnings.push_back("analysis samples outside autocorrelation envelope (min corr u=" +
                             fixed(r.diagnostics.min_envelope_corr_u) + ", v=" +
                             fixed(r.diagnostics.min_envelope_corr_v) + ")");
    }
    r.olr = olr_fit(m);
    try {
        r.rlr = rlr_fit(m);
    } catch (const Error&) {
        r.warnings.push_back("reverse regression undefined (zero I/N covariance)");
    }
}

}  // namespace

FitResult fit(std::span<const CollocationRecord> records, const FitOptions& options)
{
    FitResult r;
    r.n_input = records.size();
    const bool trim = options.trim_fraction > 0.0;
    const std::size_t expected = trim ? trimmed_size(records.size(), options.trim_fraction) : records.size();
    if (expected < options.min_records || records.size() < 2) {
        throw Error(ErrorCode::SubsetTooSmall, std::to_string(expected) + " records after trimming, need " +
                                                   std::to_string(options.min_records));
    }

    if (trim) {
        try {
            r.trim = trim_outliers(records, TrimOptions{.fraction = options.trim_fraction});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularCovariance) throw;
            r.warnings.push_back(std::string("outlier trimming skipped: ") + e.what());
        }
    }
    if (r.trim) {
        r.moments = compute_moments(records, r.trim->kept);
    } else {
        r.moments = compute_moments(records);
    }
    r.n_used = r.moments.n;
    if (r.n_used < options.recommended_records) {
        r.warnings.push_back("subset of " + std::to_string(r.n_used) + " collocations is below the recommended " +
                             std::to_string(options.recommended_records));
    }
    solve_from_moments(r, options);
    return r;
}

FitResult fit_moments(const MomentSet& m, const FitOptions& options)
{
    FitResult r;
    r.moments = m;
    r.n_input = r.n_used = m.n;
    solve_from_moments(r, options);
    return r;
}

}  // namespace infers
