#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infers/diagnostics.hpp"
#include "infers/error.hpp"
#include "infers/model.hpp"
#include "infers/reference.hpp"
#include "infers/robust.hpp"

namespace infers {

struct FitOptions {
    double trim_fraction = 0.10;  // 0 disables outlier trimming
    std::size_t grid_size = 2000;
    std::size_t min_records = 100;          // hard floor after trimming
    std::size_t recommended_records = 500;  // warn below this
    double envelope_threshold = kEnvelopeThreshold;
    unsigned workers = 1;
};

struct FitResult {
    InfersParams params;
    ResidualCurves curves;
    FitDiagnostics diagnostics;
    std::optional<TrimResult> trim;
    MomentSet moments;
    ReferenceSolution olr;
    ReferenceSolution rlr;
    double target = 0.0;
    double chosen = 0.0;
    bool on_boundary = false;  // target was infeasible, chosen sits on the feasibility edge
    std::size_t n_input = 0;
    std::size_t n_used = 0;
    std::vector<std::string> warnings;
};

// Thrown by fit() when no solution exists; carries the residual curves so a
// caller can still export them.
class FitFailure : public Error {
public:
    FitFailure(const Error& cause, ResidualCurves curves, std::vector<std::string> warnings);

    const ResidualCurves& curves() const noexcept { return curves_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    ResidualCurves curves_;
    std::vector<std::string> warnings_;
};

// trim -> moments -> variance match -> residual curves -> choice -> diagnostics.
// Throws SubsetTooSmall below options.min_records (counted after trimming).
FitResult fit(std::span<const CollocationRecord> records, const FitOptions& options = {});

// Same pipeline starting from precomputed moments (no trimming).
FitResult fit_moments(const MomentSet& m, const FitOptions& options = {});

}  // namespace infers
