#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "infers/cli.hpp"
#include "infers/cohort.hpp"
#include "infers/records_io.hpp"
#include "infers/serialize.hpp"
#include "support.hpp"

using namespace infers;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("infers_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(std::vector<std::string> args)
    {
        out_.str("");
        err_.str("");
        return cli::run(args, out_, err_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write_config(const SimulationConfig& cfg, const std::string& name = "cfg.json")
    {
        std::ofstream(path(name)) << config_to_json(cfg).dump(2);
        return path(name);
    }

    static std::string slurp(const std::string& p)
    {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    static std::size_t lines(const std::string& p)
    {
        const auto s = slurp(p);
        return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

}  // namespace

TEST_F(Cli, SimulateWritesRowsAndReport)
{
    const auto cfg = write_config(testing_support::reference_config(100, 3));
    ASSERT_EQ(run({"simulate", "--config", cfg, "--seed", "9", "--n", "100", "--out", path("a.csv")}), 0)
        << err_.str();
    EXPECT_EQ(lines(path("a.csv")), 101u);
    const auto report = nlohmann::json::parse(slurp(path("a.csv.report.json")));
    EXPECT_EQ(report["seed"], 9);
    EXPECT_FALSE(report["rng"].get<std::string>().empty());
    EXPECT_TRUE(report["timings_s"].contains("simulate"));
    for (const auto& o : report["outputs"]) {
        EXPECT_TRUE(fs::exists(o["path"].get<std::string>()));
        EXPECT_GT(fs::file_size(o["path"].get<std::string>()), 0u);
    }
}

TEST_F(Cli, SimulateIsByteReproducible)
{
    const auto cfg = write_config(testing_support::reference_config(500, 3));
    ASSERT_EQ(run({"simulate", "--config", cfg, "--seed", "4", "--out", path("a.csv")}), 0);
    ASSERT_EQ(run({"simulate", "--config", cfg, "--seed", "4", "--out", path("b.csv"), "--workers", "2"}), 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    ASSERT_EQ(run({"simulate", "--config", cfg, "--seed", "5", "--out", path("c.csv")}), 0);
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(Cli, SimulateConfigErrors)
{
    auto bad = testing_support::reference_config();
    auto doc = config_to_json(bad);
    doc["sigma2_u"]["F"] = -0.01;
    std::ofstream(path("neg.json")) << doc.dump();
    EXPECT_EQ(run({"simulate", "--config", path("neg.json"), "--out", path("x.csv")}), 2);
    EXPECT_NE(err_.str().find("sigma2"), std::string::npos) << err_.str();
    EXPECT_FALSE(fs::exists(path("x.csv")));

    doc = config_to_json(bad);
    doc["sigma_t2"] = 0.1;
    std::ofstream(path("unknown.json")) << doc.dump();
    EXPECT_EQ(run({"simulate", "--config", path("unknown.json"), "--out", path("x.csv")}), 2);
    EXPECT_NE(err_.str().find("sigma_t2"), std::string::npos);

    std::ofstream(path("broken.json")) << "{ not json";
    EXPECT_EQ(run({"simulate", "--config", path("broken.json"), "--out", path("x.csv")}), 2);
    EXPECT_EQ(run({"simulate", "--config", path("missing.json"), "--out", path("x.csv")}), 3);
    EXPECT_EQ(run({"simulate", "--out", path("x.csv")}), 2);
    EXPECT_EQ(run({"simulate", "--config", write_config(bad), "--out", path("no/such/dir/x.csv")}), 3);
}

TEST_F(Cli, FitRecoversSimulatedParameters)
{
    const auto cfg = testing_support::reference_config(5000, 8);
    ASSERT_EQ(run({"simulate", "--config", write_config(cfg), "--out", path("sim.csv")}), 0);
    ASSERT_EQ(run({"fit", "--in", path("sim.csv"), "--params-out", path("p.json"), "--curves-out", path("c.csv")}), 0)
        << err_.str();
    const auto doc = nlohmann::json::parse(slurp(path("p.json")));
    const auto& params = doc["params"];
    EXPECT_EQ(params["sigma_t2"]["unit"], "m2 s-2");
    const auto direct = fit(load_csv(path("sim.csv")).records);
    EXPECT_NEAR(params["samples"]["N"]["lambda"]["value"].get<double>(), direct.params.lambda_of(Tag::N), 1e-12);
    EXPECT_NEAR(params["sigma_t2"]["value"].get<double>(), direct.params.sigma_t2, 1e-15);
    const double var_i = population_moments(cfg).var(Tag::I);
    EXPECT_NEAR(direct.params.sigma_t2, to_params(cfg).sigma_t2, 0.25 * var_i);
    EXPECT_TRUE(doc["diagnostics"]["samples"]["I"]["u"].contains("snr"));
    EXPECT_EQ(lines(path("c.csv")), 2001u);
    EXPECT_TRUE(fs::exists(path("p.json.report.json")));
}

TEST_F(Cli, FitUsageAndInputErrors)
{
    ASSERT_EQ(run({"simulate", "--config", write_config(testing_support::reference_config(300, 1)), "--out",
                   path("sim.csv")}),
              0);
    EXPECT_EQ(run({"fit", "--in", path("sim.csv"), "--grid", "50", "--params-out", path("p.json")}), 2);
    EXPECT_EQ(run({"fit", "--in", path("sim.csv"), "--trim", "0.6", "--params-out", path("p.json")}), 2);
    EXPECT_EQ(run({"fit", "--in", path("nope.csv"), "--params-out", path("p.json")}), 3);
    std::ofstream(path("bad.csv")) << "time,lat,lon\n1,2,3\n";
    EXPECT_EQ(run({"fit", "--in", path("bad.csv"), "--params-out", path("p.json")}), 3);
    EXPECT_EQ(run({"bogus"}), 2);
    EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(Cli, IdentityFixtureExitsFourWithCurves)
{
    auto recs = simulate(testing_support::reference_config(600, 2));
    for (auto& r : recs) r.vel.fill(r[Tag::I]);
    write_csv(fs::path(path("id.csv")), recs);
    EXPECT_EQ(run({"fit", "--in", path("id.csv"), "--params-out", path("p.json"), "--curves-out", path("c.csv")}),
              4);
    EXPECT_TRUE(fs::exists(path("c.csv")));
    EXPECT_EQ(lines(path("c.csv")), 2001u);
    EXPECT_FALSE(fs::exists(path("p.json")));
    const auto report = nlohmann::json::parse(slurp(path("p.json.report.json")));
    EXPECT_EQ(report["exit_code"], 4);
}

TEST_F(Cli, SweepSpeedsMatchesStandaloneFit)
{
    auto cfg = testing_support::reference_config(20000, 6);
    ASSERT_EQ(run({"simulate", "--config", write_config(cfg), "--out", path("sim.csv")}), 0);
    ASSERT_EQ(run({"sweep", "--in", path("sim.csv"), "--mode", "speeds", "--grid", "300", "--out", path("sw"),
                   "--curves"}),
              0)
        << err_.str();
    const auto summary = slurp(path("sw/summary.csv"));
    EXPECT_EQ(lines(path("sw/summary.csv")), 102u);
    EXPECT_TRUE(fs::exists(path("sw/expfit.csv")));
    const auto report = nlohmann::json::parse(slurp(path("sw/report.json")));
    ASSERT_EQ(report["subsets"].size(), 101u);
    for (const auto& o : report["outputs"]) EXPECT_GT(fs::file_size(o["path"].get<std::string>()), 0u);

    // Header columns and the row for target 0.5 m/s.
    std::istringstream in(summary);
    std::string head, row;
    std::getline(in, head);
    for (int i = 0; i <= 40; ++i) std::getline(in, row);
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    const auto names = split(head);
    const auto cells = split(row);
    ASSERT_EQ(names.size(), cells.size());
    auto col = [&](const std::string& n) {
        return cells[std::find(names.begin(), names.end(), n) - names.begin()];
    };
    EXPECT_EQ(col("value"), "0.5");
    EXPECT_NE(std::find(names.begin(), names.end(), "sigma_t2_smooth"), names.end());
    EXPECT_NE(std::find(names.begin(), names.end(), "beta_N_fit"), names.end());

    const auto all = load_csv(path("sim.csv")).records;
    write_csv(fs::path(path("bin.csv")), select(all, SpeedBin{0.5, 500}));
    const int code = run({"fit", "--in", path("bin.csv"), "--grid", "300", "--params-out", path("bin.json")});
    if (col("status") == "ok") {
        ASSERT_EQ(code, 0);
        const auto doc = nlohmann::json::parse(slurp(path("bin.json")));
        EXPECT_EQ(std::stod(col("sigma_t2")), doc["params"]["sigma_t2"]["value"].get<double>());
        EXPECT_EQ(std::stod(col("lambda_N")), doc["params"]["samples"]["N"]["lambda"]["value"].get<double>());
    } else {
        EXPECT_NE(code, 0);
    }
}

TEST_F(Cli, SweepDaysWithoutRecordsExitsFour)
{
    ASSERT_EQ(run({"simulate", "--config", write_config(testing_support::reference_config(2000, 1)), "--out",
                   path("sim.csv")}),
              0);
    EXPECT_EQ(run({"sweep", "--in", path("sim.csv"), "--mode", "days", "--days", "1:12", "--lat-min", "15",
                   "--out", path("sw")}),
              4);
    EXPECT_EQ(lines(path("sw/summary.csv")), 13u);
    EXPECT_NE(slurp(path("sw/summary.csv")).find("SubsetTooSmall"), std::string::npos);
    EXPECT_EQ(run({"sweep", "--in", path("sim.csv"), "--mode", "days", "--k", "500", "--out", path("sw2")}), 2);
    EXPECT_EQ(run({"sweep", "--in", path("sim.csv"), "--mode", "speeds", "--targets", "1:0:0.1", "--out",
                   path("sw3")}),
              2);
}

TEST_F(Cli, SweepDaysPoolsYears)
{
    auto cfg = testing_support::reference_config(14600, 3);
    cfg.lat = 20.0;
    cfg.time_step = 3600 * 6;  // four per day for ten years
    ASSERT_EQ(run({"simulate", "--config", write_config(cfg), "--out", path("sim.csv")}), 0);
    ASSERT_EQ(run({"sweep", "--in", path("sim.csv"), "--mode", "days", "--days", "1:3", "--grid", "200", "--trim",
                   "0", "--min-n", "20", "--out", path("sw")}),
              0)
        << err_.str();
    const auto report = nlohmann::json::parse(slurp(path("sw/report.json")));
    EXPECT_EQ(report["subsets"].size(), 3u);
}
