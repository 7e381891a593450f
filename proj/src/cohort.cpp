#include "infers/cohort.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "infers/error.hpp"
#include "infers/records_io.hpp"

namespace infers {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

std::string kind_name(const SubsetSpec& spec)
{
    return std::visit(overloaded{[](const EvenYears&) { return std::string("evenYears"); },
                                 [](const OddYears&) { return std::string("oddYears"); },
                                 [](const DayOfYear&) { return std::string("dayOfYear"); },
                                 [](const SpeedBin&) { return std::string("speedBin"); }},
                      spec);
}

double spec_value(const SubsetSpec& spec)
{
    return std::visit(overloaded{[](const DayOfYear& d) { return static_cast<double>(d.day); },
                                 [](const SpeedBin& s) { return s.target; },
                                 [](const auto&) { return std::numeric_limits<double>::quiet_NaN(); }},
                      spec);
}

void validate(const SubsetSpec& spec)
{
    if (const auto* d = std::get_if<DayOfYear>(&spec); d && (d->day < 1 || d->day > 366)) {
        throw Error(ErrorCode::InvalidArgument, "day of year must lie in [1, 366]");
    }
    if (const auto* s = std::get_if<SpeedBin>(&spec)) {
        if (s->k < 100) throw Error(ErrorCode::InvalidArgument, "speed bin size k must be at least 100");
        if (!(s->target > 0.0)) throw Error(ErrorCode::InvalidArgument, "target speed must be positive");
    }
}

std::vector<CollocationRecord> select(std::span<const CollocationRecord> records, const SubsetSpec& spec)
{
    validate(spec);
    std::vector<CollocationRecord> out;
    const auto keep_if = [&](auto&& pred) {
        for (const auto& r : records) {
            if (pred(r)) out.push_back(r);
        }
    };
    std::visit(overloaded{
                   [&](const EvenYears&) { keep_if([](const auto& r) { return civil_date(r.time).year % 2 == 0; }); },
                   [&](const OddYears&) { keep_if([](const auto& r) { return civil_date(r.time).year % 2 != 0; }); },
                   [&](const DayOfYear& d) {
                       keep_if([&](const auto& r) {
                           return r.lat >= d.lat_min && civil_date(r.time).day_of_year == d.day;
                       });
                   },
                   [&](const SpeedBin& s) {
                       if (records.size() < s.k) {
                           throw Error(ErrorCode::SubsetTooSmall, "speed bin needs " + std::to_string(s.k) +
                                                                      " records, have " +
                                                                      std::to_string(records.size()));
                       }
                       std::vector<double> gap(records.size());
                       for (std::size_t i = 0; i < records.size(); ++i) {
                           gap[i] = std::abs(std::abs(records[i][Tag::I]) - s.target);
                       }
                       std::vector<std::size_t> idx(records.size());
                       std::iota(idx.begin(), idx.end(), std::size_t{0});
                       const auto less = [&](std::size_t a, std::size_t b) {
                           return gap[a] < gap[b] || (gap[a] == gap[b] && a < b);
                       };
                       std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s.k - 1), idx.end(),
                                        less);
                       idx.resize(s.k);
                       std::sort(idx.begin(), idx.end());
                       for (std::size_t i : idx) out.push_back(records[i]);
                   },
               },
               spec);
    return out;
}

std::vector<SweepEntry> sweep(std::span<const CollocationRecord> records, std::span<const SubsetSpec> specs,
                              const FitOptions& options, unsigned workers)
{
    std::vector<SweepEntry> entries(specs.size());
    FitOptions per_subset = options;
    per_subset.workers = 1;

    const auto run_one = [&](std::size_t k) {
        SweepEntry& e = entries[k];
        e.spec = specs[k];
        try {
            const auto subset = select(records, specs[k]);
            e.subset_size = subset.size();
            e.result = fit(subset, per_subset);
            e.curves = e.result->curves;
        } catch (const FitFailure& f) {
            e.error = f.code();
            e.message = f.what();
            e.curves = f.curves();
        } catch (const Error& err) {
            e.error = err.code();
            e.message = err.what();
        }
    };

    workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, specs.size())));
    if (workers == 1) {
        for (std::size_t k = 0; k < specs.size(); ++k) run_one(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < specs.size(); k = next++) run_one(k);
            });
        }
    }
    return entries;
}

std::vector<std::optional<double>> running_mean(std::span<const std::optional<double>> series, std::size_t window)
{
    if (window == 0 || window % 2 == 0) throw Error(ErrorCode::InvalidArgument, "window must be odd and positive");
    const std::size_t half = window / 2;
    std::vector<std::optional<double>> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(series.size() - 1, i + half);
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t j = lo; j <= hi; ++j) {
            if (series[j] && std::isfinite(*series[j])) {
                sum += *series[j];
                ++count;
            }
        }
        if (count > 0) out[i] = sum / static_cast<double>(count);
    }
    return out;
}

}  // namespace infers
