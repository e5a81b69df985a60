#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fishnet/cli.hpp"
#include "fishnet/csv.hpp"
#include "fishnet/errors.hpp"
#include "fishnet/version.hpp"

namespace fs = std::filesystem;
using fishnet::cli::run;
using nlohmann::json;

namespace
{
struct Result
{
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> const& args)
{
    std::ostringstream out, err;
    int const code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(fs::path const& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

json read_json(fs::path const& p)
{
    std::ifstream is(p);
    return json::parse(is);
}

fs::path fresh_dir(std::string const& name)
{
    auto const dir = fs::path("cli_out") / name;
    fs::remove_all(dir);
    return dir;
}
}  // namespace

TEST(Cli, GridParsing)
{
    auto const g = fishnet::cli::parse_grid("1:2:0.25");
    ASSERT_EQ(g.size(), 5u);
    EXPECT_DOUBLE_EQ(g.back(), 2.0);
    EXPECT_THROW((void)fishnet::cli::parse_grid("1:2"), fishnet::ConfigError);
    EXPECT_THROW((void)fishnet::cli::parse_grid("2:1:0.1"), fishnet::ConfigError);
    EXPECT_THROW((void)fishnet::cli::parse_grid("a:b:c"), fishnet::ConfigError);
}

TEST(Cli, P1TableToStdout)
{
    auto const r = call({"p1-table", "--xmin", "0", "--xmax", "1", "--step", "0.5"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, 5), "x,P1\n");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(call({}).code, 2);
    EXPECT_EQ(call({"no-such-command"}).code, 2);
    EXPECT_EQ(call({"predict", "--lambda", "3"}).code, 2);
    EXPECT_EQ(call({"order-stats", "--N", "8", "--k-list", "8"}).code, 2);
    EXPECT_EQ(call({"order-stats", "--k-list", "1,x"}).code, 2);
    EXPECT_EQ(call({"simulate", "--rows", "1"}).code, 2);
    EXPECT_EQ(call({"campaign", "--kt-ratio", "-1"}).code, 2);
    EXPECT_EQ(call({"pipeline", "--kt-ratio", "0.1", "--replicas", "50"}).code, 2);
    EXPECT_EQ(call({"p1-table", "--step", "0"}).code, 2);
    EXPECT_EQ(call({"--help"}).code, 0);
}

TEST(Cli, NumericFailureExitCode)
{
    auto const dir = fresh_dir("bad_input");
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "nc.csv");
        os << "N_c\n1.5\n2\n";
    }
    EXPECT_EQ(call({"fit-nc", "--input", (dir / "nc.csv").string()}).code, 3);
}

TEST(Cli, OrderStatsLongFormat)
{
    auto const r = call({"order-stats", "--N", "512", "--k-list", "0,5", "--x-grid", "6:7:0.5"});
    EXPECT_EQ(r.code, 0);
    std::istringstream is(r.out);
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "k,x,W,weibull_x,weibull_y");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}

TEST(Cli, PredictReportsTailStrength)
{
    auto const dir = fresh_dir("predict");
    auto const r = call({"predict", "--lambda", "24", "--theta", "0.69", "--k0", "5", "--dk", "0",
                         "--x-grid", "6:9:0.5", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("strength at Pf=1e-06"), std::string::npos);
    auto const summary = read_json(dir / "predict_summary.json");
    double const x = summary.at("strength_at_probability").at("1e-06").at("x");
    EXPECT_GT(x, 5.0);
    EXPECT_LT(x, 8.0);
    auto const pf = fishnet::read_csv_column(dir / "predict.csv", {"Pf"});
    EXPECT_EQ(pf.size(), 7u);
    EXPECT_EQ(read_json(dir / "manifest.json").at("version"), fishnet::kVersion);
}

TEST(Cli, SimulateIsReproducible)
{
    auto const a = fresh_dir("sim_a");
    auto const b = fresh_dir("sim_b");
    std::vector<std::string> base{"simulate", "--rows", "6", "--gaps", "6", "--seed", "9", "--out"};
    auto args_a = base;
    args_a.push_back(a.string());
    auto args_b = base;
    args_b.push_back(b.string());
    ASSERT_EQ(call(args_a).code, 0);
    ASSERT_EQ(call(args_b).code, 0);
    for (char const* f : {"events.csv", "topology.json", "summary.json", "stage_prepeak.json",
                          "stage_peak.json", "stage_postpeak.json", "stage_final.json"})
    {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    auto const m = read_json(a / "manifest.json");
    EXPECT_EQ(m.at("subcommand"), "simulate");
    EXPECT_EQ(m.at("master_seed"), 9);
}

TEST(Cli, SimulateDefaultsAndBrittleLimit)
{
    auto const dir = fresh_dir("sim_brittle");
    auto const r = call({"simulate", "--jumps", "1", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto const s = read_json(dir / "summary.json");
    EXPECT_EQ(s.at("links"), 512);
    EXPECT_NEAR(s.at("first_sigma_n").get<double>(), s.at("min_strength").get<double>(), 1e-8);
}

TEST(Cli, CampaignReplayIsBitIdentical)
{
    auto const a = fresh_dir("camp_a");
    auto const b = fresh_dir("camp_b");
    auto const r = call({"campaign", "--rows", "6", "--gaps", "6", "--replicas", "24", "--threads", "3",
                         "--out", a.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto const replay = call({"replay", "--manifest", (a / "manifest.json").string(), "--out", b.string(),
                              "--threads", "1"});
    ASSERT_EQ(replay.code, 0) << replay.err;
    for (char const* f : {"sigma_max.csv", "nc_hist.csv", "ratio_trace.csv", "ecdf_weibull.csv", "summary.json"})
    {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    auto const ma = read_json(a / "manifest.json");
    auto const mb = read_json(b / "manifest.json");
    EXPECT_EQ(ma.at("config"), mb.at("config"));
}

TEST(Cli, FitNcFromCampaign)
{
    auto const dir = fresh_dir("fit");
    ASSERT_EQ(call({"campaign", "--rows", "6", "--gaps", "6", "--replicas", "30", "--out", dir.string()}).code, 0);
    auto const r = call({"fit-nc", "--input", (dir / "sigma_max.csv").string(), "--out", (dir / "fit").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto const summary = read_json(dir / "fit" / "nc_fit.json");
    EXPECT_EQ(summary.at("samples"), 30);
    EXPECT_GT(summary.at("lambda").get<double>(), 0.0);
    auto const fitted = fishnet::read_csv_column(dir / "fit" / "nc_fit.csv", {"fitted_pmf"});
    EXPECT_FALSE(fitted.empty());
}

TEST(Cli, PipelineComparesSlopes)
{
    auto const dir = fresh_dir("pipeline");
    auto const r = call({"pipeline", "--rows", "8", "--gaps", "8", "--replicas", "100", "--kt-ratio", "0.1",
                         "--kt-ratio", "0.5", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto const summary = read_json(dir / "summary.json");
    ASSERT_EQ(summary.at("slopes").size(), 2u);
    EXPECT_EQ(summary.at("slopes")[0].at("dk"), 0);  // calibrated default at 0.1
    EXPECT_EQ(summary.at("slopes")[1].at("dk"), 3);
    EXPECT_TRUE(summary.at("slopes")[0].at("strength_at_probability").contains("1e-06"));
    ASSERT_EQ(summary.at("median_ratios").size(), 1u);
    EXPECT_GT(summary.at("median_ratios")[0].at("median_ratio").get<double>(), 1.0);

    std::ifstream is(dir / "comparison.csv");
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "kt_ratio,x,pf_empirical,pf_analytic,weibull_x,weibull_y_empirical,weibull_y_analytic");
    EXPECT_TRUE(fs::exists(dir / "kt_0.1" / "sigma_max.csv"));
    EXPECT_TRUE(fs::exists(dir / "kt_0.5" / "gamma_estimate.csv"));
}

TEST(Cli, PipelineNeedsCalibrationOrFlags)
{
    auto const dir = fresh_dir("pipeline_uncal");
    EXPECT_EQ(call({"pipeline", "--rows", "4", "--gaps", "4", "--replicas", "100", "--kt-ratio", "0.4",
                    "--out", dir.string()})
                  .code,
              2);
}
