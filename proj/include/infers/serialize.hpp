#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "infers/cohort.hpp"
#include "infers/curvefit.hpp"
#include "infers/fit.hpp"
#include "infers/simulator.hpp"

namespace infers {

inline constexpr int kFormatVersion = 1;

// Simulation config documents use the SimulationConfig field names.  Unknown
// keys, wrong types and invalid values raise InvalidArgument naming the field.
SimulationConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const SimulationConfig& cfg);

// Parameters, diagnostics and solution metadata with units on every quantity.
nlohmann::json fit_to_json(const FitResult& result);
nlohmann::json params_to_json(const InfersParams& p);

// sigma_t2,res_fe,res_fr,res_fs,res_er,res_es,res_rs,feasible
void write_curves_csv(std::ostream& out, const ResidualCurves& curves);
void write_curves_file(const std::filesystem::path& path, const ResidualCurves& curves);

struct OutputEntry {
    std::string path;
    std::uintmax_t bytes = 0;
};

struct RunReport {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::optional<std::uint64_t> seed;
    std::string rng;
    std::vector<std::pair<std::string, double>> timings;  // stage, seconds
    std::vector<std::string> warnings;
    std::vector<OutputEntry> outputs;
    int exit_code = 0;

    void add_output(const std::filesystem::path& path);
};

nlohmann::json report_to_json(const RunReport& report);
void write_report(const std::filesystem::path& path, const RunReport& report);

std::string tool_version();

}  // namespace infers
