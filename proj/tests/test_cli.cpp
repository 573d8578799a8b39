#include <doctest.h>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "mortscen/bootstrap.hpp"
#include "mortscen/breakpoint.hpp"
#include "mortscen/csv.hpp"
#include "mortscen/dataset_io.hpp"
#include "mortscen/fit_io.hpp"
#include "mortscen/lifetable.hpp"
#include "mortscen/projection.hpp"
#include "mortscen/scenarios.hpp"
#include "support/synthetic.hpp"

using namespace mortscen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path &path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Run the installed binary with `args`, capturing exit code and both streams.
/// `env_prefix` may carry VAR=value assignments for the child process.
CliResult run_cli(const std::string &args, const fs::path &scratch,
                  const std::string &env_prefix = "") {
    const fs::path out_file = scratch / "stdout.txt";
    const fs::path err_file = scratch / "stderr.txt";
    std::string cmd = env_prefix;
    if (!cmd.empty())
        cmd += " ";
    cmd += "\"" MORTSCEN_CLI_PATH "\" " + args + " > \"" + out_file.string() + "\" 2> \"" +
           err_file.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

/// Fresh scratch directory per test, removed on destruction.
struct Scratch {
    fs::path dir;

    Scratch() {
        static int counter = 0;
        dir = fs::temp_directory_path() /
              ("mortscen_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
};

/// Synthetic dataset with a shared continuous 2011 kink so the standardised
/// rate series is exactly piecewise linear: every live cause has the same
/// slopes, two causes are rare enough to stay empty.
MortalityDataset cli_dataset(Sex sex = Sex::male) {
    std::array<synthetic::CellTrend, CauseGroup::count> trends;
    for (const auto &cause : CauseGroup::all()) {
        const bool rare = cause == CauseGroup::from_code("INF") ||
                          cause == CauseGroup::from_code("GEN");
        const double level = rare ? -14.0 : -7.2 + 0.08 * cause.index();
        const double b1 = -0.02;
        trends[cause.index()] = {level - b1 * 2009.0, b1, 0.03, 0.0};
    }
    return synthetic::exact_dataset(trends, 1e5, 2011, sex);
}

/// Write the dataset and return the common argument string pointing at it.
std::string common_args(const MortalityDataset &ds, const Scratch &scratch) {
    save_dataset(ds, scratch.dir / "deaths.csv", scratch.dir / "exposures.csv");
    return "--deaths \"" + (scratch.dir / "deaths.csv").string() + "\" --exposures \"" +
           (scratch.dir / "exposures.csv").string() + "\"";
}

std::string std_pop_arg() {
    return std::string(" --std-pop \"") + MORTSCEN_DATA_DIR + "/esp2013.csv\"";
}

std::string out_arg(const Scratch &scratch) {
    return " --out \"" + scratch.dir.string() + "\"";
}

} // namespace

TEST_CASE("cli: validate reports clean and broken inputs with matching exit codes") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const std::string base = common_args(ds, scratch);

    const auto good = run_cli("validate " + base, scratch.dir);
    CHECK(good.exit_code == 0);
    CHECK(good.out.find("ok: 0 error(s)") != std::string::npos);

    {
        std::ofstream deaths(scratch.dir / "deaths.csv", std::ios::app);
        deaths << "male,2005,30-34,CIR,-3\n";
    }
    const auto bad = run_cli("validate " + base, scratch.dir);
    CHECK(bad.exit_code == 2);
    CHECK(bad.out.find("invalid:") != std::string::npos);
    CHECK(bad.out.find("error:") != std::string::npos);
}

TEST_CASE("cli: fit writes a grid identical to the in-process fit") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const auto result = run_cli("fit " + common_args(ds, scratch) + out_arg(scratch), scratch.dir);
    REQUIRE(result.exit_code == 0);

    const fs::path grid_path = scratch.dir / "fits_male.json";
    REQUIRE(fs::exists(grid_path));
    CHECK(result.out.find("fits_male.json") != std::string::npos);

    const FitSurface from_cli = read_fits(grid_path);
    const FitSurface direct = fit_surface(ds);
    for (const auto &age : AgeGroup::all())
        for (const auto &cause : CauseGroup::all()) {
            const CellFit &a = from_cli.fit(age, cause);
            const CellFit &b = direct.fit(age, cause);
            REQUIRE(a.zeroed == b.zeroed);
            if (a.zeroed)
                continue;
            for (int j = 0; j < 4; ++j)
                CHECK((*a.beta)[j] == (*b.beta)[j]);
            CHECK(*a.theta == *b.theta);
        }
    CHECK(from_cli.fit(AgeGroup::of_age(40), CauseGroup::from_code("INF")).zeroed);
}

TEST_CASE("cli: breakpoint reports the continuous 2011 break of a kinked series") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const auto result = run_cli("breakpoint " + common_args(ds, scratch) + std_pop_arg() +
                                    out_arg(scratch),
                                scratch.dir);
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("selected: continuous at 2011") != std::string::npos);

    const auto table = csv::read_table(scratch.dir / "bic_male.csv", "epsilon,kind,bic");
    CHECK(table.size() == 29); // one straight-line row plus 14 years x 2 kinds

    const json summary = json::parse(slurp(scratch.dir / "breakpoint_male.json"));
    CHECK(summary.at("kind").get<std::string>() == "continuous");
    CHECK(summary.at("epsilon").get<int>() == 2011);
}

TEST_CASE("cli: asmr series and summary reproduce the library computation") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const std::string base = common_args(ds, scratch);

    REQUIRE(run_cli("fit " + base + out_arg(scratch), scratch.dir).exit_code == 0);
    const std::string fits_arg = " --fits \"" + (scratch.dir / "fits_male.json").string() + "\"";

    const auto result = run_cli("asmr " + base + fits_arg + std_pop_arg() +
                                    " --scenario cause:CIR" + out_arg(scratch),
                                scratch.dir);
    REQUIRE(result.exit_code == 0);

    const FitSurface surface = fit_surface(ds);
    const StandardPopulation sp =
        load_standard_population(fs::path(MORTSCEN_DATA_DIR) / "esp2013.csv");
    const auto spec = ScenarioSpec::revert_cause(CauseGroup::from_code("CIR"));
    const auto series = scenario_asmr_series(surface, spec, sp, {2001, 2018});

    std::string expected = "year,log_asmr\n";
    for (int i = 0; i < 18; ++i)
        expected += std::to_string(2001 + i) + "," + csv::format_six(series[i]) + "\n";
    CHECK(slurp(scratch.dir / "asmr_cause_CIR_male.csv") == expected);

    const json summary = json::parse(slurp(scratch.dir / "asmr_summary_cause_CIR_male.json"));
    const std::vector<double> tail(series.end() - 8, series.end());
    CHECK(summary.at("w").get<double>() == improvement_slope(tail, {2011, 2018}).value);
    CHECK(summary.at("scenario").get<std::string>() == "cause:CIR");
}

TEST_CASE("cli: le series respects the starting age and matches the library") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const std::string base = common_args(ds, scratch);

    const auto result = run_cli("le " + base + " --age 65 --scenario unadjusted" +
                                    out_arg(scratch),
                                scratch.dir);
    REQUIRE(result.exit_code == 0);

    const FitSurface surface = fit_surface(ds);
    const auto values = le_series(surface, ScenarioSpec::unadjusted(), 65, {2001, 2018});

    std::string expected = "year,age_start,scenario,e_complete\n";
    for (int i = 0; i < 18; ++i)
        expected += std::to_string(2001 + i) + ",65,unadjusted," + csv::format_six(values[i]) + "\n";
    CHECK(slurp(scratch.dir / "le65_unadjusted_male.csv") == expected);

    const json summary = json::parse(slurp(scratch.dir / "le65_summary_unadjusted_male.json"));
    const std::vector<double> tail(values.end() - 8, values.end());
    CHECK(summary.at("v").get<double>() == le_slope(tail, {2011, 2018}).value);
    CHECK(summary.at("age_start").get<int>() == 65);
}

TEST_CASE("cli: contribution tables reproduce the library shares") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const std::string base = common_args(ds, scratch);

    REQUIRE(run_cli("contrib " + base + std_pop_arg() + " --measure asmr" + out_arg(scratch),
                    scratch.dir)
                .exit_code == 0);
    REQUIRE(run_cli("contrib " + base + " --measure le" + out_arg(scratch), scratch.dir)
                .exit_code == 0);

    const FitSurface surface = fit_surface(ds);
    const StandardPopulation sp =
        load_standard_population(fs::path(MORTSCEN_DATA_DIR) / "esp2013.csv");
    const auto asmr_table = asmr_contributions(surface, sp);
    const auto birth = le_contributions(surface, 0);
    const auto at65 = le_contributions(surface, 65);

    std::string expected = "cause,rho\n";
    for (const auto &cause : CauseGroup::all())
        expected += cause.abbreviation() + "," + csv::format_six(asmr_table.share[cause.index()]) +
                    "\n";
    CHECK(slurp(scratch.dir / "contrib_asmr_male.csv") == expected);

    expected = "cause,phi_birth,phi_65\n";
    for (const auto &cause : CauseGroup::all())
        expected += cause.abbreviation() + "," + csv::format_six(birth.share[cause.index()]) + "," +
                    csv::format_six(at65.share[cause.index()]) + "\n";
    CHECK(slurp(scratch.dir / "contrib_le_male.csv") == expected);

    const json doc = json::parse(slurp(scratch.dir / "contrib_asmr_male.json"));
    CHECK(doc.at("w_obs").get<double>() == asmr_table.baseline);
    CHECK(doc.at("w_all").get<double>() == asmr_table.all_adjusted);
    CHECK(doc.at("rho").at("CIR").get<double>() == asmr_table.share[CauseGroup::from_code("CIR").index()]);
}

TEST_CASE("cli: bootstrap output is deterministic and equals the in-process interval") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const std::string base = common_args(ds, scratch);
    const std::string flags = " --stat w --iterations 40 --seed 7" + std_pop_arg();

    Scratch out_a;
    Scratch out_b;
    REQUIRE(run_cli("bootstrap " + base + flags + out_arg(out_a), scratch.dir).exit_code == 0);
    REQUIRE(run_cli("bootstrap " + base + flags + out_arg(out_b), scratch.dir).exit_code == 0);

    CHECK(slurp(out_a.dir / "bootstrap_w_male.csv") == slurp(out_b.dir / "bootstrap_w_male.csv"));
    CHECK(slurp(out_a.dir / "bootstrap_w_male.json") == slurp(out_b.dir / "bootstrap_w_male.json"));

    const StandardPopulation sp =
        load_standard_population(fs::path(MORTSCEN_DATA_DIR) / "esp2013.csv");
    BootstrapConfig config;
    config.iterations = 40;
    config.seed = 7;
    const auto direct = bootstrap_ci(fit_surface(ds), ExposureGrid::from_dataset(ds),
                                     statistic_by_name("w", sp), config);

    const json doc = json::parse(slurp(out_a.dir / "bootstrap_w_male.json"));
    CHECK(doc.at("point").get<double>() == direct.point);
    CHECK(doc.at("ci_low").get<double>() == direct.ci_low);
    CHECK(doc.at("ci_high").get<double>() == direct.ci_high);
    CHECK(doc.at("iterations").get<int>() == 40);
    CHECK(doc.at("seed").get<std::uint64_t>() == 7);
}

TEST_CASE("cli: projections cover the horizon and match the library paths") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const std::string base = common_args(ds, scratch);

    const auto result = run_cli("project " + base + " --fs 3 --age 0 --horizon-end 2024" +
                                    out_arg(scratch),
                                scratch.dir);
    REQUIRE(result.exit_code == 0);

    const FitSurface surface = fit_surface(ds);
    const auto path = project_le_path(surface, FutureScenario::fs3({2019, 2024}), 0);

    std::string expected = "year,scenario,age_start,e_complete\n";
    for (int i = 0; i < 6; ++i)
        expected += std::to_string(2019 + i) + ",fs3,0," + csv::format_six(path[i].e_complete) +
                    "\n";
    CHECK(slurp(scratch.dir / "projection_fs3_le0_male.csv") == expected);

    const auto flat = run_cli("project " + base + " --fs 4:0.02 --age 65 --horizon-end 2022" +
                                  out_arg(scratch),
                              scratch.dir);
    REQUIRE(flat.exit_code == 0);
    CHECK(fs::exists(scratch.dir / "projection_fs4_0_02_le65_male.csv"));
}

TEST_CASE("cli: errors carry machine-readable diagnostics and exit codes") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const std::string base = common_args(ds, scratch);

    const auto missing = run_cli("fit --deaths /nonexistent.csv --exposures \"" +
                                     (scratch.dir / "exposures.csv").string() + "\"" +
                                     out_arg(scratch),
                                 scratch.dir);
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("SchemaError") != std::string::npos);

    const auto bad_stat = run_cli("bootstrap " + base + std_pop_arg() + " --stat median" +
                                      out_arg(scratch),
                                  scratch.dir);
    CHECK(bad_stat.exit_code == 2);
    CHECK(bad_stat.err.find("InvalidArgument") != std::string::npos);

    const auto bad_z = run_cli("project " + base + " --fs 4:1.5" + out_arg(scratch), scratch.dir);
    CHECK(bad_z.exit_code == 2);
    CHECK(bad_z.err.find("InvalidArgument") != std::string::npos);

    const auto bad_flag = run_cli("fit " + base + " --bogus", scratch.dir);
    CHECK(bad_flag.exit_code == 2);

    const auto help = run_cli("--help", scratch.dir);
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("Usage") != std::string::npos);
}

TEST_CASE("cli: output directory comes from --out, the environment, or a config file") {
    Scratch scratch;
    const auto ds = cli_dataset();
    const std::string base = common_args(ds, scratch);

    Scratch env_out;
    const auto via_env = run_cli("fit " + base, scratch.dir,
                                 "MORTSCEN_OUT_DIR=\"" + env_out.dir.string() + "\"");
    REQUIRE(via_env.exit_code == 0);
    CHECK(fs::exists(env_out.dir / "fits_male.json"));

    Scratch cfg_out;
    const fs::path cfg = scratch.dir / "mortscen.ini";
    {
        std::ofstream out(cfg);
        out << "out=\"" << cfg_out.dir.string() << "\"\n";
    }
    const auto via_cfg = run_cli("fit " + base + " --config \"" + cfg.string() + "\"",
                                 scratch.dir);
    REQUIRE(via_cfg.exit_code == 0);
    CHECK(fs::exists(cfg_out.dir / "fits_male.json"));
}
