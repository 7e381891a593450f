#include "infers/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "infers/cohort.hpp"
#include "infers/curvefit.hpp"
#include "infers/records_io.hpp"
#include "infers/serialize.hpp"
#include "infers/simulator.hpp"

namespace infers::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::MissingColumn:
    case ErrorCode::EmptyFile: return kIo;
    case ErrorCode::InvalidArgument: return kUsage;
    case ErrorCode::NoMinimaFound: return kNoMinima;
    case ErrorCode::NoFeasibleRegion: return kNoFeasible;
    default: return kEstimation;
    }
}

namespace {

class Stopwatch {
public:
    double lap()
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

unsigned default_workers()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

void note_rejects(const LoadResult& loaded, RunReport& report, std::ostream& err)
{
    if (loaded.rejected.empty()) return;
    report.warnings.push_back(std::to_string(loaded.rejected.size()) + " input rows rejected");
    for (const auto& r : loaded.rejected) {
        err << "rejected line " << r.line << ": " << r.reason << '\n';
    }
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    unsigned workers = default_workers();
    CLI::Option* seed_opt = nullptr;
    CLI::Option* n_opt = nullptr;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err)
{
    RunReport report;
    report.command = "simulate";
    Stopwatch clock;

    std::ifstream in(a.config);
    if (!in) {
        err << "error: cannot read config " << a.config << '\n';
        return kIo;
    }
    SimulationConfig cfg;
    try {
        cfg = config_from_json(json::parse(in));
        if (*a.seed_opt) cfg.seed = a.seed;
        if (*a.n_opt) cfg.n = a.n;
        validate(cfg);
    } catch (const json::exception& e) {
        err << "error: config " << a.config << ": " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: config " << a.config << ": " << e.what() << '\n';
        return kUsage;
    }
    report.config = config_to_json(cfg);
    report.seed = cfg.seed;
    report.rng = rng_identity();
    report.timings.emplace_back("config", clock.lap());

    const auto records = simulate(cfg, a.workers);
    report.timings.emplace_back("simulate", clock.lap());

    try {
        write_csv(fs::path(a.out), records);
        report.add_output(a.out);
        report.timings.emplace_back("write", clock.lap());
        write_report(a.out + ".report.json", report);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    }
    out << "wrote " << records.size() << " records to " << a.out << '\n';
    return kOk;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
    std::string in;
    double trim = 0.10;
    std::size_t grid = 2000;
    std::size_t min_n = 100;
    std::string params_out;
    std::string curves_out;
    std::string report;
    unsigned workers = default_workers();
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err)
{
    RunReport report;
    report.command = "fit";
    report.config = {{"in", a.in},           {"trim", a.trim},     {"grid", a.grid},
                     {"min_n", a.min_n},     {"workers", a.workers}, {"params_out", a.params_out},
                     {"curves_out", a.curves_out}};
    const fs::path report_path = a.report.empty() ? fs::path(a.params_out + ".report.json") : fs::path(a.report);
    Stopwatch clock;

    const auto finish = [&](int code) {
        report.exit_code = code;
        try {
            write_report(report_path, report);
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return code == kOk ? kIo : code;
        }
        return code;
    };

    LoadResult loaded;
    try {
        loaded = load_csv(a.in);
    } catch (const Error& e) {
        err << "error: " << a.in << ": " << e.what() << '\n';
        return finish(exit_code_for(e.code()));
    }
    note_rejects(loaded, report, err);
    report.timings.emplace_back("load", clock.lap());

    FitOptions opts;
    opts.trim_fraction = a.trim;
    opts.grid_size = a.grid;
    opts.min_records = a.min_n;
    opts.workers = a.workers;

    try {
        FitResult result = fit(loaded.records, opts);
        report.timings.emplace_back("fit", clock.lap());
        report.warnings.insert(report.warnings.end(), result.warnings.begin(), result.warnings.end());
        write_file_atomic(a.params_out, fit_to_json(result).dump(2) + "\n");
        report.add_output(a.params_out);
        if (!a.curves_out.empty()) {
            write_curves_file(a.curves_out, result.curves);
            report.add_output(a.curves_out);
        }
        report.timings.emplace_back("write", clock.lap());
        for (const auto& w : result.warnings) err << "warning: " << w << '\n';
        out << "sigma_t2 = " << format_double(result.chosen) << " m2 s-2 from " << result.n_used << " records\n";
        return finish(kOk);
    } catch (const FitFailure& f) {
        report.timings.emplace_back("fit", clock.lap());
        report.warnings.insert(report.warnings.end(), f.warnings().begin(), f.warnings().end());
        report.warnings.emplace_back(f.what());
        err << "error: " << f.what() << '\n';
        if (!a.curves_out.empty()) {
            try {
                write_curves_file(a.curves_out, f.curves());
                report.add_output(a.curves_out);
            } catch (const Error& e) {
                err << "error: " << e.what() << '\n';
            }
        }
        return finish(exit_code_for(f.code()));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return finish(exit_code_for(e.code()));
    }
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
    std::string in;
    std::string mode;
    double lat_min = 15.0;
    std::string days = "1:366";
    std::string years = "all";
    std::string targets = "0.1:1.1:0.01";
    std::size_t k = 500;
    std::string out;
    bool curves = false;
    double trim = 0.10;
    std::size_t grid = 2000;
    std::size_t min_n = 100;
    unsigned workers = default_workers();
    std::vector<CLI::Option*> day_only;
    std::vector<CLI::Option*> speed_only;
};

std::vector<double> split_numbers(const std::string& text, const std::string& flag)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != part.size()) throw Error(ErrorCode::InvalidArgument, flag + ": bad number '" + part + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<double> parse_targets(const std::string& text)
{
    const auto v = split_numbers(text, "--targets");
    if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) {
        throw Error(ErrorCode::InvalidArgument, "--targets: expected START:STOP:STEP with STEP > 0 and STOP >= START");
    }
    const auto count = static_cast<std::size_t>(std::floor((v[1] - v[0]) / v[2] + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::round((v[0] + static_cast<double>(i) * v[2]) * 1e12) / 1e12;
    }
    return out;
}

std::vector<int> parse_days(const std::string& text)
{
    const auto v = split_numbers(text, "--days");
    if (v.empty() || v.size() > 2 || v.front() != std::floor(v.front()) || v.back() != std::floor(v.back()) ||
        v.back() < v.front()) {
        throw Error(ErrorCode::InvalidArgument, "--days: expected DAY or FIRST:LAST");
    }
    std::vector<int> out;
    for (int d = static_cast<int>(v.front()); d <= static_cast<int>(v.back()); ++d) out.push_back(d);
    return out;
}

// One numeric summary column.  Model-parameter columns also get a smoothed
// and, in speeds mode, an exponential-fit companion.
struct Column {
    std::string name;
    std::function<double(const FitResult&)> get;
    bool parameter = false;
};

std::vector<Column> summary_columns()
{
    std::vector<Column> cols;
    cols.push_back({"sigma_t2", [](const FitResult& r) { return r.params.sigma_t2; }, true});
    cols.push_back({"sigma_t2_u", [](const FitResult& r) { return r.params.sigma_t2_u; }, true});
    cols.push_back({"sigma_t2_v", [](const FitResult& r) { return r.params.sigma_t2_v; }, true});
    for (Tag t : kAnalysisTags) {
        cols.push_back({"beta_" + std::string(tag_name(t)), [t](const FitResult& r) { return r.params.beta_of(t); },
                        true});
    }
    for (Tag t : kAnalysisTags) {
        cols.push_back({"lambda_" + std::string(tag_name(t)),
                        [t](const FitResult& r) { return r.params.lambda_of(t); }, true});
    }
    for (Tag t : kAllTags) {
        cols.push_back({"sigma2_" + std::string(tag_name(t)),
                        [t](const FitResult& r) { return r.params.sigma2_of(t); }, true});
    }
    for (Tag t : kAnalysisTags) {
        const std::string n(tag_name(t));
        cols.push_back({"alpha_" + n + "_u", [t](const FitResult& r) { return r.params.alpha_of(t).real(); }});
        cols.push_back({"alpha_" + n + "_v", [t](const FitResult& r) { return r.params.alpha_of(t).imag(); }});
    }
    for (Tag t : kAllTags) {
        for (Component c : {Component::U, Component::V}) {
            const std::string suffix = std::string(tag_name(t)) + (c == Component::U ? "_u" : "_v");
            cols.push_back({"corr_" + suffix, [t, c](const FitResult& r) { return r.diagnostics.at(t, c).corr_truth; }});
            cols.push_back({"snr_" + suffix, [t, c](const FitResult& r) { return r.diagnostics.at(t, c).snr_db; }});
            cols.push_back({"sigma_err_indiv_" + suffix,
                            [t, c](const FitResult& r) { return r.diagnostics.at(t, c).sigma_err_indiv; }});
        }
    }
    cols.push_back({"min_envelope_corr_u", [](const FitResult& r) { return r.diagnostics.min_envelope_corr_u; }});
    cols.push_back({"min_envelope_corr_v", [](const FitResult& r) { return r.diagnostics.min_envelope_corr_v; }});
    cols.push_back({"target", [](const FitResult& r) { return r.target; }});
    cols.push_back({"chosen", [](const FitResult& r) { return r.chosen; }});
    cols.push_back({"olr_slope", [](const FitResult& r) { return r.olr.slope; }});
    cols.push_back({"rlr_slope", [](const FitResult& r) { return r.rlr.slope; }});
    return cols;
}

std::string csv_cell(const std::optional<double>& v)
{
    return v && std::isfinite(*v) ? format_double(*v) : std::string();
}

// Speeds below this are left out of the nowcast-slope exponential fit.
constexpr double kBetaNFitMinSpeed = 0.3;

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err)
{
    RunReport report;
    report.command = "sweep";
    Stopwatch clock;

    const bool speeds = a.mode == "speeds";
    for (CLI::Option* opt : speeds ? a.day_only : a.speed_only) {
        if (opt->count() > 0) {
            err << "error: " << opt->get_name() << " does not apply in " << a.mode << " mode\n";
            return kUsage;
        }
    }

    std::vector<SubsetSpec> specs;
    try {
        if (speeds) {
            for (double t : parse_targets(a.targets)) specs.emplace_back(SpeedBin{t, a.k});
        } else {
            for (int d : parse_days(a.days)) specs.emplace_back(DayOfYear{d, a.lat_min});
        }
        for (const auto& s : specs) validate(s);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    report.config = {{"in", a.in},       {"mode", a.mode},     {"years", a.years},   {"trim", a.trim},
                     {"grid", a.grid},   {"min_n", a.min_n},   {"workers", a.workers}, {"curves", a.curves},
                     {"out", a.out}};
    if (speeds) {
        report.config["targets"] = a.targets;
        report.config["k"] = a.k;
    } else {
        report.config["days"] = a.days;
        report.config["lat_min"] = a.lat_min;
    }

    const fs::path dir(a.out);
    const auto finish = [&](int code) {
        report.exit_code = code;
        try {
            write_report(dir / "report.json", report);
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return code == kOk ? kIo : code;
        }
        return code;
    };

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        err << "error: cannot create output directory " << a.out << '\n';
        return kIo;
    }

    LoadResult loaded;
    try {
        loaded = load_csv(a.in);
    } catch (const Error& e) {
        err << "error: " << a.in << ": " << e.what() << '\n';
        return finish(exit_code_for(e.code()));
    }
    note_rejects(loaded, report, err);
    std::vector<CollocationRecord> records = std::move(loaded.records);
    if (a.years == "even") records = select(records, EvenYears{});
    if (a.years == "odd") records = select(records, OddYears{});
    report.timings.emplace_back("load", clock.lap());

    FitOptions opts;
    opts.trim_fraction = a.trim;
    opts.grid_size = a.grid;
    opts.min_records = a.min_n;
    const auto entries = sweep(records, specs, opts, a.workers);
    report.timings.emplace_back("fit", clock.lap());

    const auto cols = summary_columns();
    const std::size_t rows = entries.size();
    std::vector<std::vector<std::optional<double>>> values(cols.size(), std::vector<std::optional<double>>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!entries[r].ok()) continue;
        for (std::size_t c = 0; c < cols.size(); ++c) values[c][r] = cols[c].get(*entries[r].result);
    }

    std::vector<double> xs(rows);
    for (std::size_t r = 0; r < rows; ++r) xs[r] = spec_value(entries[r].spec);

    std::vector<std::vector<std::optional<double>>> smooth(cols.size());
    std::vector<std::optional<ExpFit>> fits(cols.size());
    std::vector<std::vector<std::optional<double>>> fitted(cols.size(), std::vector<std::optional<double>>(rows));
    std::ostringstream expfit;
    expfit << "column,a,b,c,rss,status,n_points,x_min\n";
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (!cols[c].parameter) continue;
        smooth[c] = running_mean(values[c], 5);
        if (!speeds) continue;
        const double x_min = cols[c].name == "beta_N" ? kBetaNFitMinSpeed : -HUGE_VAL;
        std::vector<double> x, y;
        for (std::size_t r = 0; r < rows; ++r) {
            if (values[c][r] && std::isfinite(*values[c][r]) && xs[r] >= x_min - 1e-12) {
                x.push_back(xs[r]);
                y.push_back(*values[c][r]);
            }
        }
        std::string status = "insufficient_points";
        if (x.size() >= 4) {
            fits[c] = exp_fit(x, y);
            status = fits[c]->ill_conditioned ? "ill_conditioned" : "ok";
            for (std::size_t r = 0; r < rows; ++r) {
                if (xs[r] >= x_min - 1e-12) fitted[c][r] = fits[c]->a + fits[c]->b * std::exp(fits[c]->c * xs[r]);
            }
        }
        expfit << cols[c].name;
        if (fits[c]) {
            expfit << ',' << format_double(fits[c]->a) << ',' << format_double(fits[c]->b) << ','
                   << format_double(fits[c]->c) << ',' << format_double(fits[c]->rss);
        } else {
            expfit << ",,,,";
        }
        expfit << ',' << status << ',' << x.size() << ','
               << (std::isfinite(x_min) ? format_double(x_min) : std::string()) << '\n';
    }

    std::ostringstream summary;
    summary << "index,kind,value,n_subset,n_used,status";
    for (const auto& col : cols) summary << ',' << col.name;
    for (const auto& col : cols) {
        if (col.parameter) summary << ',' << col.name << "_smooth";
    }
    if (speeds) {
        for (const auto& col : cols) {
            if (col.parameter) summary << ',' << col.name << "_fit";
        }
    }
    summary << '\n';
    json subsets = json::array();
    std::size_t succeeded = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& e = entries[r];
        const std::string status = e.ok() ? "ok" : std::string(to_string(*e.error));
        succeeded += e.ok() ? 1 : 0;
        summary << r << ',' << kind_name(e.spec) << ',' << format_double(xs[r]) << ',' << e.subset_size << ','
                << (e.ok() ? std::to_string(e.result->n_used) : std::string()) << ',' << status;
        for (std::size_t c = 0; c < cols.size(); ++c) summary << ',' << csv_cell(values[c][r]);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (cols[c].parameter) summary << ',' << csv_cell(smooth[c][r]);
        }
        if (speeds) {
            for (std::size_t c = 0; c < cols.size(); ++c) {
                if (cols[c].parameter) summary << ',' << csv_cell(fitted[c][r]);
            }
        }
        summary << '\n';

        json s{{"index", r}, {"kind", kind_name(e.spec)}, {"value", xs[r]}, {"status", status}};
        if (!e.message.empty()) s["message"] = e.message;
        if (e.ok() && !e.result->warnings.empty()) s["warnings"] = e.result->warnings;
        subsets.push_back(std::move(s));
    }
    report.config["subsets"] = subsets.size();

    try {
        write_file_atomic(dir / "summary.csv", summary.str());
        report.add_output(dir / "summary.csv");
        if (speeds) {
            write_file_atomic(dir / "expfit.csv", expfit.str());
            report.add_output(dir / "expfit.csv");
        }
        if (a.curves) {
            fs::create_directories(dir / "curves", ec);
            for (std::size_t r = 0; r < rows; ++r) {
                if (!entries[r].curves) continue;
                char name[64];
                std::snprintf(name, sizeof name, "%s_%03zu.csv", kind_name(entries[r].spec).c_str(), r);
                write_curves_file(dir / "curves" / name, *entries[r].curves);
                report.add_output(dir / "curves" / name);
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return finish(exit_code_for(e.code()));
    }
    report.timings.emplace_back("write", clock.lap());

    json doc = report_to_json(report);
    doc["subsets"] = subsets;
    const int code = succeeded > 0 ? kOk : kNoMinima;
    doc["exit_code"] = code;
    try {
        write_file_atomic(dir / "report.json", doc.dump(2) + "\n");
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    }
    out << succeeded << " of " << rows << " subsets fitted\n";
    if (succeeded == 0) err << "error: no subset produced a solution\n";
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Shared-truth and cross-correlated error estimation for collocated velocity samples", "infers"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Draw synthetic collocations from the forward model");
    s->add_option("--config", sim.config, "Simulation config (JSON)")->required();
    sim.seed_opt = s->add_option("--seed", sim.seed, "Override the config seed");
    sim.n_opt = s->add_option("--n", sim.n, "Override the config record count");
    s->add_option("--out", sim.out, "Output CSV")->required();
    s->add_option("--workers", sim.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    FitArgs fa;
    auto* f = app.add_subcommand("fit", "Fit the model to one collocation file");
    f->add_option("--in", fa.in, "Input CSV")->required();
    f->add_option("--trim", fa.trim, "Outlier trim fraction, 0 disables")
        ->check(CLI::Range(0.0, 0.4999))
        ->capture_default_str();
    f->add_option("--grid", fa.grid, "Grid points over [0, Var(I)]")
        ->check(CLI::Range(kMinGridSize, std::size_t{100000000}))
        ->capture_default_str();
    f->add_option("--min-n", fa.min_n, "Minimum records after trimming")
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()))
        ->capture_default_str();
    f->add_option("--params-out", fa.params_out, "Parameter JSON")->required();
    f->add_option("--curves-out", fa.curves_out, "Residual curve CSV");
    f->add_option("--report", fa.report, "Run report JSON (default <params-out>.report.json)");
    f->add_option("--workers", fa.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "Fit a series of subsets");
    w->add_option("--in", sw.in, "Input CSV")->required();
    w->add_option("--mode", sw.mode, "Subset family")->required()->check(CLI::IsMember({"days", "speeds"}));
    sw.day_only.push_back(w->add_option("--lat-min", sw.lat_min, "Days mode: minimum latitude")->capture_default_str());
    sw.day_only.push_back(w->add_option("--days", sw.days, "Days mode: DAY or FIRST:LAST")->capture_default_str());
    w->add_option("--years", sw.years, "Year parity prefilter")
        ->check(CLI::IsMember({"all", "even", "odd"}))
        ->capture_default_str();
    sw.speed_only.push_back(
        w->add_option("--targets", sw.targets, "Speeds mode: START:STOP:STEP (m/s)")->capture_default_str());
    sw.speed_only.push_back(w->add_option("--k", sw.k, "Speeds mode: records per bin")
                                ->check(CLI::Range(std::size_t{100}, std::numeric_limits<std::size_t>::max()))
                                ->capture_default_str());
    w->add_option("--out", sw.out, "Output directory")->required();
    w->add_flag("--curves", sw.curves, "Also write per-subset residual curves");
    w->add_option("--trim", sw.trim, "Outlier trim fraction, 0 disables")
        ->check(CLI::Range(0.0, 0.4999))
        ->capture_default_str();
    w->add_option("--grid", sw.grid, "Grid points over [0, Var(I)]")
        ->check(CLI::Range(kMinGridSize, std::size_t{100000000}))
        ->capture_default_str();
    w->add_option("--min-n", sw.min_n, "Minimum records after trimming")
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()))
        ->capture_default_str();
    w->add_option("--workers", sw.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*s) return cmd_simulate(sim, out, err);
        if (*f) return cmd_fit(fa, out, err);
        return cmd_sweep(sw, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kEstimation;
    }
}

}  // namespace infers::cli
