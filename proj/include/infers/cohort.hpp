#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "infers/fit.hpp"
#include "infers/record.hpp"

namespace infers {

struct EvenYears {};
struct OddYears {};
// Same UTC day of year pooled across all years, restricted to lat >= lat_min.
struct DayOfYear {
    int day = 1;
    double lat_min = -90.0;
};
// The k records whose drifter speed |I| is nearest to target (m/s).
struct SpeedBin {
    double target = 0.1;
    std::size_t k = 500;
};

using SubsetSpec = std::variant<EvenYears, OddYears, DayOfYear, SpeedBin>;

std::string kind_name(const SubsetSpec& spec);
// Numeric parameter of the subset (day or target speed); NaN for year parity.
double spec_value(const SubsetSpec& spec);
// Throws InvalidArgument for a day outside [1, 366], k < 100 or target <= 0.
void validate(const SubsetSpec& spec);

// Selected records keep their input order.  Speed-bin ties go to the earlier
// record; fewer than k candidates raises SubsetTooSmall.
std::vector<CollocationRecord> select(std::span<const CollocationRecord> records, const SubsetSpec& spec);

struct SweepEntry {
    SubsetSpec spec;
    std::size_t subset_size = 0;
    std::optional<FitResult> result;
    std::optional<ErrorCode> error;
    std::string message;
    std::optional<ResidualCurves> curves;  // present on success and on fit failures that produced curves

    bool ok() const { return result.has_value(); }
};

// Independent fits per subset, in spec order.  Failures are recorded in the
// entry, never raised.
std::vector<SweepEntry> sweep(std::span<const CollocationRecord> records, std::span<const SubsetSpec> specs,
                              const FitOptions& options, unsigned workers = 1);

// Centred moving average over present entries (missing entries are skipped
// and the average renormalised); windows are truncated at the ends.
std::vector<std::optional<double>> running_mean(std::span<const std::optional<double>> series,
                                                std::size_t window = 5);

}  // namespace infers
