#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "infers/model.hpp"
#include "infers/record.hpp"

namespace infers {

// Forward-model configuration.  Calibrations and propagation factors are
// indexed by Tag (entries for I are ignored); error variances are given per
// sample and per component.
struct SimulationConfig {
    std::size_t n = 1000;
    double sigma_t2_u = 0.0;
    double sigma_t2_v = 0.0;
    std::array<Velocity, kTagCount> alpha{};
    std::array<double, kTagCount> beta{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    std::array<double, kTagCount> lambda{};
    std::array<double, kTagCount> sigma2_u{};
    std::array<double, kTagCount> sigma2_v{};
    std::uint64_t seed = 0;
    // Student-t degrees of freedom for the individual errors; 0 means Gaussian.
    double error_dof = 0.0;
    std::int64_t start_time = 757382400;  // 1994-01-01T00:00:00Z
    std::int64_t time_step = 86400;
    double lat = 0.0;
    double lon = 0.0;
    std::size_t chunk_size = 65536;  // records per independently seeded chunk
};

// Throws InvalidArgument naming the offending field.
void validate(const SimulationConfig& cfg);

// Joint model parameters equivalent to a configuration.
InfersParams to_params(const SimulationConfig& cfg);

// Draws truth and all individual errors independently per record and
// composes the six samples.  Chunk k of `chunk_size` records uses its own
// generator seeded from (seed, k), so output is independent of `workers`.
std::vector<CollocationRecord> simulate(const SimulationConfig& cfg, unsigned workers = 1);

// Exact population moments, joint and per component.
MomentSet population_moments(const SimulationConfig& cfg);

// Identity of the random generator, recorded in run reports.
std::string rng_identity();

}  // namespace infers
