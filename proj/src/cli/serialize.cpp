#include "infers/serialize.hpp"

#include <cmath>
#include <sstream>

#include "infers/error.hpp"
#include "infers/records_io.hpp"

#ifndef INFERS_VERSION
#define INFERS_VERSION "0.0.0"
#endif

namespace infers {

using nlohmann::json;

namespace {

constexpr const char* kVar = "m2 s-2";
constexpr const char* kSpeed = "m s-1";
constexpr const char* kOne = "1";

json quantity(double value, const char* unit)
{
    json q{{"unit", unit}};
    q["value"] = std::isfinite(value) ? json(value) : json(nullptr);
    return q;
}

json velocity(const Velocity& v)
{
    return json{{"u", v.real()}, {"v", v.imag()}, {"unit", kSpeed}};
}

[[noreturn]] void bad(const std::string& field, const std::string& why)
{
    throw Error(ErrorCode::InvalidArgument, field + ": " + why);
}

double number(const json& doc, const std::string& field)
{
    if (!doc.is_number()) bad(field, "expected a number");
    return doc.get<double>();
}

template <class T>
T whole(const json& doc, const std::string& field)
{
    if (!doc.is_number_integer() && !doc.is_number_unsigned()) bad(field, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
        if (doc.is_number_integer() && doc.get<std::int64_t>() < 0) bad(field, "must not be negative");
    }
    return doc.get<T>();
}

// {"N": x, "F": y, ...} into a Tag-indexed array; missing tags keep defaults.
void per_tag(const json& doc, const std::string& field, std::array<double, kTagCount>& out, bool allow_I)
{
    if (!doc.is_object()) bad(field, "expected an object keyed by sample tag");
    for (const auto& [key, value] : doc.items()) {
        const auto tag = parse_tag(key);
        if (!tag || (!allow_I && *tag == Tag::I)) bad(field + "." + key, "unknown sample tag");
        out[index(*tag)] = number(value, field + "." + key);
    }
}

json tag_object(const std::array<double, kTagCount>& values, bool with_I)
{
    json out = json::object();
    for (Tag t : kAllTags) {
        if (t == Tag::I && !with_I) continue;
        out[std::string(tag_name(t))] = values[index(t)];
    }
    return out;
}

json component_json(const ComponentDiagnostics& d)
{
    return json{
        {"sigma_total", quantity(d.sigma_total, kSpeed)},
        {"sigma_truth", quantity(d.sigma_truth, kSpeed)},
        {"sigma_err_total", quantity(d.sigma_err_total, kSpeed)},
        {"sigma_err_indiv", quantity(d.sigma_err_indiv, kSpeed)},
        {"err_var_indiv", quantity(d.err_var_indiv, kVar)},
        {"corr_truth", quantity(d.corr_truth, kOne)},
        {"snr", quantity(d.snr_db, "dB")},
    };
}

json reference_json(const ReferenceSolution& r)
{
    json err = json::object();
    for (Tag t : kAllTags) {
        const double v = r.err_var_of(t);
        if (!std::isnan(v)) err[std::string(tag_name(t))] = quantity(v, kVar);
    }
    return json{
        {"slope", quantity(r.slope, kOne)},
        {"intercept", velocity(r.intercept)},
        {"sigma_t2", quantity(r.sigma_t2, kVar)},
        {"err_var", err},
    };
}

std::string cell(double v)
{
    return std::isfinite(v) ? format_double(v) : std::string();
}

}  // namespace

SimulationConfig config_from_json(const json& doc)
{
    if (!doc.is_object()) bad("config", "expected a JSON object");
    SimulationConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "n") {
            cfg.n = whole<std::size_t>(value, key);
        } else if (key == "seed") {
            cfg.seed = whole<std::uint64_t>(value, key);
        } else if (key == "sigma_t2_u") {
            cfg.sigma_t2_u = number(value, key);
        } else if (key == "sigma_t2_v") {
            cfg.sigma_t2_v = number(value, key);
        } else if (key == "alpha") {
            if (!value.is_object()) bad(key, "expected an object keyed by sample tag");
            for (const auto& [tag_key, uv] : value.items()) {
                const std::string field = key + "." + tag_key;
                const auto tag = parse_tag(tag_key);
                if (!tag || *tag == Tag::I) bad(field, "unknown sample tag");
                if (!uv.is_array() || uv.size() != 2) bad(field, "expected [u, v]");
                cfg.alpha[index(*tag)] = {number(uv[0], field + "[0]"), number(uv[1], field + "[1]")};
            }
        } else if (key == "beta") {
            per_tag(value, key, cfg.beta, false);
        } else if (key == "lambda") {
            per_tag(value, key, cfg.lambda, false);
        } else if (key == "sigma2_u") {
            per_tag(value, key, cfg.sigma2_u, true);
        } else if (key == "sigma2_v") {
            per_tag(value, key, cfg.sigma2_v, true);
        } else if (key == "error_dof") {
            cfg.error_dof = number(value, key);
        } else if (key == "start_time") {
            if (!value.is_string()) bad(key, "expected an ISO-8601 UTC time string");
            try {
                cfg.start_time = parse_time(value.get<std::string>());
            } catch (const Error& e) {
                bad(key, e.what());
            }
        } else if (key == "time_step") {
            cfg.time_step = whole<std::int64_t>(value, key);
        } else if (key == "lat") {
            cfg.lat = number(value, key);
        } else if (key == "lon") {
            cfg.lon = number(value, key);
        } else if (key == "chunk_size") {
            cfg.chunk_size = whole<std::size_t>(value, key);
        } else {
            bad(key, "unknown key");
        }
    }
    validate(cfg);
    return cfg;
}

json config_to_json(const SimulationConfig& cfg)
{
    json alpha = json::object();
    for (Tag t : kAnalysisTags) {
        alpha[std::string(tag_name(t))] = {cfg.alpha[index(t)].real(), cfg.alpha[index(t)].imag()};
    }
    return json{
        {"n", cfg.n},
        {"seed", cfg.seed},
        {"sigma_t2_u", cfg.sigma_t2_u},
        {"sigma_t2_v", cfg.sigma_t2_v},
        {"alpha", alpha},
        {"beta", tag_object(cfg.beta, false)},
        {"lambda", tag_object(cfg.lambda, false)},
        {"sigma2_u", tag_object(cfg.sigma2_u, true)},
        {"sigma2_v", tag_object(cfg.sigma2_v, true)},
        {"error_dof", cfg.error_dof},
        {"start_time", format_time(cfg.start_time)},
        {"time_step", cfg.time_step},
        {"lat", cfg.lat},
        {"lon", cfg.lon},
        {"chunk_size", cfg.chunk_size},
    };
}

json params_to_json(const InfersParams& p)
{
    json samples = json::object();
    for (Tag t : kAllTags) {
        json s{
            {"alpha", velocity(p.alpha_of(t))},
            {"beta", quantity(p.beta_of(t), kOne)},
            {"sigma2", quantity(p.sigma2_of(t), kVar)},
        };
        if (t != Tag::I) s["lambda"] = quantity(p.lambda_of(t), kOne);
        samples[std::string(tag_name(t))] = std::move(s);
    }
    return json{
        {"sigma_t2", quantity(p.sigma_t2, kVar)},
        {"sigma_t2_u", quantity(p.sigma_t2_u, kVar)},
        {"sigma_t2_v", quantity(p.sigma_t2_v, kVar)},
        {"samples", samples},
        {"feasible", is_feasible(p)},
    };
}

json fit_to_json(const FitResult& r)
{
    json diag = json::object();
    for (Tag t : kAllTags) {
        diag[std::string(tag_name(t))] = {
            {"u", component_json(r.diagnostics.at(t, Component::U))},
            {"v", component_json(r.diagnostics.at(t, Component::V))},
        };
    }
    const auto pair_name = [](const std::array<Tag, 2>& p) {
        return std::string(tag_name(p[0])) + std::string(tag_name(p[1]));
    };
    json trim = nullptr;
    if (r.trim) {
        trim = {
            {"h", r.trim->h},
            {"flagged", r.trim->flagged.size()},
            {"start", r.trim->start},
            {"det_history", r.trim->det_history},
        };
    }
    return json{
        {"format_version", kFormatVersion},
        {"params", params_to_json(r.params)},
        {"diagnostics",
         {
             {"samples", diag},
             {"envelope",
              {
                  {"u", {{"min_corr", quantity(r.diagnostics.min_envelope_corr_u, kOne)},
                         {"pair", pair_name(r.diagnostics.min_envelope_pair_u)}}},
                  {"v", {{"min_corr", quantity(r.diagnostics.min_envelope_corr_v, kOne)},
                         {"pair", pair_name(r.diagnostics.min_envelope_pair_v)}}},
              }},
         }},
        {"solution",
         {
             {"beta_N_variance_match", quantity(r.curves.beta_N, kOne)},
             {"target", quantity(r.target, kVar)},
             {"chosen", quantity(r.chosen, kVar)},
             {"on_boundary", r.on_boundary},
             {"grid_size", r.curves.size()},
             {"grid_step", quantity(r.curves.step(), kVar)},
         }},
        {"references", {{"olr", reference_json(r.olr)}, {"rlr", reference_json(r.rlr)}}},
        {"records", {{"input", r.n_input}, {"used", r.n_used}}},
        {"trim", trim},
        {"warnings", r.warnings},
    };
}

void write_curves_csv(std::ostream& out, const ResidualCurves& c)
{
    out << "sigma_t2,res_fe,res_fr,res_fs,res_er,res_es,res_rs,feasible\n";
    for (std::size_t g = 0; g < c.size(); ++g) {
        out << format_double(c.grid[g]);
        for (std::size_t k = 0; k < kPairCount; ++k) out << ',' << cell(c.residual[k][g]);
        out << ',' << (c.feasible[g] ? 1 : 0) << '\n';
    }
}

void write_curves_file(const std::filesystem::path& path, const ResidualCurves& curves)
{
    AtomicFile file(path);
    write_curves_csv(file.stream(), curves);
    file.commit();
}

void RunReport::add_output(const std::filesystem::path& path)
{
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    outputs.push_back({path.string(), ec ? 0 : size});
}

json report_to_json(const RunReport& r)
{
    json timings = json::object();
    for (const auto& [stage, seconds] : r.timings) timings[stage] = seconds;
    json outputs = json::array();
    for (const auto& o : r.outputs) outputs.push_back({{"path", o.path}, {"bytes", o.bytes}});
    json doc{
        {"format_version", kFormatVersion},
        {"tool_version", tool_version()},
        {"command", r.command},
        {"config", r.config},
        {"timings_s", timings},
        {"warnings", r.warnings},
        {"outputs", outputs},
        {"exit_code", r.exit_code},
    };
    if (r.seed) doc["seed"] = *r.seed;
    if (!r.rng.empty()) doc["rng"] = r.rng;
    return doc;
}

void write_report(const std::filesystem::path& path, const RunReport& report)
{
    write_file_atomic(path, report_to_json(report).dump(2) + "\n");
}

std::string tool_version()
{
    return INFERS_VERSION;
}

}  // namespace infers
