#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mortscen/bootstrap.hpp"
#include "mortscen/breakpoint.hpp"
#include "mortscen/csv.hpp"
#include "mortscen/dataset_io.hpp"
#include "mortscen/errors.hpp"
#include "mortscen/fit_io.hpp"
#include "mortscen/lifetable.hpp"
#include "mortscen/projection.hpp"
#include "mortscen/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string deaths;
    std::string exposures;
    std::string fits;
    std::string sex = "male";
    std::string std_pop;
    std::string cause_format = "auto";
    std::string out_dir = ".";
    int breakpoint = 2011;
    int threads = 1;
};

mortscen::LoadOptions load_options(const CommonArgs &args) {
    mortscen::LoadOptions options;
    if (args.cause_format == "group")
        options.cause_column = mortscen::CauseColumn::group;
    else if (args.cause_format == "icd10")
        options.cause_column = mortscen::CauseColumn::icd10;
    else if (args.cause_format == "auto")
        options.cause_column = mortscen::CauseColumn::auto_detect;
    else
        throw mortscen::InvalidArgument("unrecognised cause format '" + args.cause_format +
                                        "' (expected auto, group or icd10)");
    return options;
}

mortscen::MortalityDataset load_data(const CommonArgs &args) {
    if (args.deaths.empty() || args.exposures.empty())
        throw mortscen::InvalidArgument("--deaths and --exposures are required here");
    return mortscen::load_dataset(args.deaths, args.exposures,
                                  mortscen::sex_from_string(args.sex), load_options(args));
}

/// A fit grid either read from --fits or derived from the raw data.
mortscen::FitSurface obtain_surface(const CommonArgs &args) {
    if (!args.fits.empty())
        return mortscen::read_fits(args.fits);
    return mortscen::fit_surface(load_data(args), args.breakpoint, args.threads);
}

mortscen::StandardPopulation load_std_pop(const CommonArgs &args) {
    if (args.std_pop.empty())
        throw mortscen::InvalidArgument("--std-pop is required here");
    return mortscen::load_standard_population(args.std_pop);
}

fs::path out_path(const CommonArgs &args, const std::string &name) {
    fs::path dir(args.out_dir);
    if (!dir.empty())
        fs::create_directories(dir);
    return dir / name;
}

std::ofstream open_out(const fs::path &path) {
    std::ofstream out(path);
    if (!out)
        throw mortscen::SchemaError("cannot write file: " + path.string());
    return out;
}

void write_json(const fs::path &path, const json &doc) {
    auto out = open_out(path);
    out << doc.dump(2) << "\n";
}

mortscen::FutureScenario parse_future_scenario(const std::string &text,
                                               const std::string &who_path,
                                               mortscen::Sex sex, int horizon_end) {
    const mortscen::YearRange horizon{2019, horizon_end};
    if (text == "1")
        return mortscen::FutureScenario::fs1(horizon);
    if (text.rfind("2:", 0) == 0)
        return mortscen::FutureScenario::fs2(mortscen::CauseGroup::from_code(text.substr(2)),
                                             horizon);
    if (text == "3")
        return mortscen::FutureScenario::fs3(horizon);
    if (text.rfind("4:", 0) == 0)
        return mortscen::FutureScenario::fs4(mortscen::csv::parse_double(text.substr(2), "--fs"),
                                             horizon);
    if (text == "5") {
        if (who_path.empty())
            throw mortscen::InvalidArgument("--fs 5 needs --who <trend file>");
        return mortscen::FutureScenario::fs5(mortscen::load_who_trends(who_path, sex), horizon);
    }
    throw mortscen::InvalidArgument("unrecognised scenario '" + text +
                                    "' (expected 1, 2:<CODE>, 3, 4:<z> or 5)");
}

std::string file_tag(const std::string &label) {
    std::string tag = label;
    for (char &ch : tag)
        if (ch == ':' || ch == '.')
            ch = '_';
    return tag;
}

int run_validate(const CommonArgs &args) {
    const auto report = mortscen::validate_dataset(
        args.deaths, args.exposures, mortscen::sex_from_string(args.sex), load_options(args));
    for (const auto &issue : report.errors)
        std::cout << "error: " << issue.file
                  << (issue.line > 0 ? ":" + std::to_string(issue.line) : "") << ": "
                  << issue.message << "\n";
    for (const auto &issue : report.warnings)
        std::cout << "warning: " << issue.file << ": " << issue.message << "\n";
    std::cout << (report.ok() ? "ok" : "invalid") << ": " << report.errors.size()
              << " error(s), " << report.warnings.size() << " warning(s)\n";
    return report.ok() ? 0 : 2;
}

int run_fit(const CommonArgs &args) {
    const auto surface = mortscen::fit_surface(load_data(args), args.breakpoint, args.threads);
    const auto path = out_path(args, "fits_" + args.sex + ".json");
    mortscen::write_fits(surface, path);
    std::cout << path.string() << "\n";
    return 0;
}

int run_breakpoint(const CommonArgs &args) {
    const auto ds = load_data(args);
    const auto sp = load_std_pop(args);
    const auto series = mortscen::asmr_series(ds, sp);
    std::vector<int> years;
    for (int t = ds.years().first; t <= ds.years().last; ++t)
        years.push_back(t);
    const auto selection = mortscen::select_breakpoint(series, years);

    const auto table_path = out_path(args, "bic_" + args.sex + ".csv");
    mortscen::write_bic_table(selection, table_path);

    json summary;
    summary["kind"] = mortscen::to_string(selection.best.kind);
    if (selection.best.kind != mortscen::BreakKind::none)
        summary["epsilon"] = selection.best.epsilon;
    summary["bic"] = selection.best_fit.bic;
    summary["coefficients"] = selection.best_fit.beta;
    write_json(out_path(args, "breakpoint_" + args.sex + ".json"), summary);

    std::cout << table_path.string() << "\n";
    std::cout << "selected: " << mortscen::to_string(selection.best.kind);
    if (selection.best.kind != mortscen::BreakKind::none)
        std::cout << " at " << selection.best.epsilon;
    std::cout << "\n";
    return 0;
}

int run_asmr(const CommonArgs &args, const std::string &scenario_label) {
    const auto surface = obtain_surface(args);
    const auto sp = load_std_pop(args);
    const auto spec = mortscen::ScenarioSpec::from_label(scenario_label);

    const auto series =
        mortscen::scenario_asmr_series(surface, spec, sp, surface.years());
    const auto series_path =
        out_path(args, "asmr_" + file_tag(spec.label()) + "_" + args.sex + ".csv");
    {
        auto out = open_out(series_path);
        out << "year,log_asmr\n";
        for (int i = 0; i < surface.years().size(); ++i)
            out << (surface.years().first + i) << ',' << mortscen::csv::format_six(series[i])
                << "\n";
    }

    const mortscen::YearRange window{2011, 2018};
    std::vector<double> tail(series.end() - window.size(), series.end());
    const auto summary = mortscen::improvement_slope(tail, window);
    json doc;
    doc["scenario"] = spec.label();
    doc["window"] = {{"first", window.first}, {"last", window.last}};
    doc["w"] = summary.value;
    write_json(out_path(args, "asmr_summary_" + file_tag(spec.label()) + "_" + args.sex + ".json"),
               doc);
    std::cout << series_path.string() << "\n";
    return 0;
}

int run_le(const CommonArgs &args, const std::string &scenario_label, int age_start) {
    const auto surface = obtain_surface(args);
    const auto spec = mortscen::ScenarioSpec::from_label(scenario_label);

    const auto values = mortscen::le_series(surface, spec, age_start, surface.years());
    const auto series_path = out_path(args, "le" + std::to_string(age_start) + "_" +
                                                file_tag(spec.label()) + "_" + args.sex + ".csv");
    {
        auto out = open_out(series_path);
        out << "year,age_start,scenario,e_complete\n";
        for (int i = 0; i < surface.years().size(); ++i)
            out << (surface.years().first + i) << ',' << age_start << ',' << spec.label() << ','
                << mortscen::csv::format_six(values[i]) << "\n";
    }

    const mortscen::YearRange window{2011, 2018};
    std::vector<double> tail(values.end() - window.size(), values.end());
    const auto summary = mortscen::le_slope(tail, window);
    json doc;
    doc["scenario"] = spec.label();
    doc["age_start"] = age_start;
    doc["window"] = {{"first", window.first}, {"last", window.last}};
    doc["v"] = summary.value;
    write_json(out_path(args, "le" + std::to_string(age_start) + "_summary_" +
                                  file_tag(spec.label()) + "_" + args.sex + ".json"),
               doc);
    std::cout << series_path.string() << "\n";
    return 0;
}

int run_contrib(const CommonArgs &args, const std::string &measure) {
    const auto surface = obtain_surface(args);
    if (measure == "asmr") {
        const auto sp = load_std_pop(args);
        const auto table = mortscen::asmr_contributions(surface, sp);
        const auto path = out_path(args, "contrib_asmr_" + args.sex + ".csv");
        auto out = open_out(path);
        out << "cause,rho\n";
        for (const auto &cause : mortscen::CauseGroup::all())
            out << cause.abbreviation() << ','
                << mortscen::csv::format_six(table.share[cause.index()]) << "\n";
        json doc;
        doc["w_obs"] = table.baseline;
        doc["w_all"] = table.all_adjusted;
        for (const auto &cause : mortscen::CauseGroup::all()) {
            doc["w"][cause.abbreviation()] = table.adjusted[cause.index()];
            doc["rho"][cause.abbreviation()] = table.share[cause.index()];
        }
        write_json(out_path(args, "contrib_asmr_" + args.sex + ".json"), doc);
        std::cout << path.string() << "\n";
        return 0;
    }
    if (measure == "le") {
        const auto birth = mortscen::le_contributions(surface, 0);
        const auto at65 = mortscen::le_contributions(surface, 65);
        const auto path = out_path(args, "contrib_le_" + args.sex + ".csv");
        auto out = open_out(path);
        out << "cause,phi_birth,phi_65\n";
        for (const auto &cause : mortscen::CauseGroup::all())
            out << cause.abbreviation() << ','
                << mortscen::csv::format_six(birth.share[cause.index()]) << ','
                << mortscen::csv::format_six(at65.share[cause.index()]) << "\n";
        json doc;
        doc["v_obs"] = {{"birth", birth.baseline}, {"65", at65.baseline}};
        doc["v_all"] = {{"birth", birth.all_adjusted}, {"65", at65.all_adjusted}};
        for (const auto &cause : mortscen::CauseGroup::all()) {
            doc["v"][cause.abbreviation()] = {{"birth", birth.adjusted[cause.index()]},
                                              {"65", at65.adjusted[cause.index()]}};
            doc["phi"][cause.abbreviation()] = {{"birth", birth.share[cause.index()]},
                                                {"65", at65.share[cause.index()]}};
        }
        write_json(out_path(args, "contrib_le_" + args.sex + ".json"), doc);
        std::cout << path.string() << "\n";
        return 0;
    }
    throw mortscen::InvalidArgument("unrecognised measure '" + measure +
                                    "' (expected asmr or le)");
}

int run_bootstrap(const CommonArgs &args, const std::string &stat_name,
                  const std::string &scenario_label, int iterations, std::uint64_t seed,
                  double level) {
    const auto ds = load_data(args);
    mortscen::FitSurface surface = args.fits.empty()
                                       ? mortscen::fit_surface(ds, args.breakpoint, args.threads)
                                       : mortscen::read_fits(args.fits);
    const auto sp = load_std_pop(args);

    mortscen::BootstrapConfig config;
    config.iterations = iterations;
    config.seed = seed;
    config.level = level;
    config.scenario = mortscen::ScenarioSpec::from_label(scenario_label);
    config.threads = args.threads;

    const auto result =
        mortscen::bootstrap_ci(surface, mortscen::ExposureGrid::from_dataset(ds),
                               mortscen::statistic_by_name(stat_name, sp), config);

    const auto replicates_path =
        out_path(args, "bootstrap_" + file_tag(stat_name) + "_" + args.sex + ".csv");
    {
        auto out = open_out(replicates_path);
        out << "iteration,value\n";
        for (std::size_t i = 0; i < result.replicates.size(); ++i)
            out << i << ',' << mortscen::csv::format_six(result.replicates[i]) << "\n";
    }

    json doc;
    doc["statistic"] = result.statistic;
    doc["scenario"] = config.scenario.label();
    doc["point"] = result.point;
    doc["level"] = result.level;
    doc["ci_low"] = result.ci_low;
    doc["ci_high"] = result.ci_high;
    doc["iterations"] = result.iterations;
    doc["seed"] = result.seed;
    write_json(out_path(args, "bootstrap_" + file_tag(stat_name) + "_" + args.sex + ".json"),
               doc);
    std::cout << replicates_path.string() << "\n";
    return 0;
}

int run_project(const CommonArgs &args, const std::string &fs_label, const std::string &who_path,
                int age_start, int horizon_end) {
    const auto surface = obtain_surface(args);
    const auto scenario = parse_future_scenario(fs_label, who_path,
                                                mortscen::sex_from_string(args.sex), horizon_end);
    const auto path = mortscen::project_le_path(surface, scenario, age_start);

    const auto csv_path = out_path(args, "projection_" + file_tag(scenario.label()) + "_le" +
                                             std::to_string(age_start) + "_" + args.sex + ".csv");
    auto out = open_out(csv_path);
    out << "year,scenario,age_start,e_complete\n";
    for (int i = 0; i < scenario.horizon.size(); ++i)
        out << (scenario.horizon.first + i) << ',' << scenario.label() << ',' << age_start << ','
            << mortscen::csv::format_six(path[i].e_complete) << "\n";
    std::cout << csv_path.string() << "\n";
    return 0;
}

std::string error_kind(const mortscen::Error &e) {
    if (dynamic_cast<const mortscen::SchemaError *>(&e))
        return "SchemaError";
    if (dynamic_cast<const mortscen::GapError *>(&e))
        return "GapError";
    if (dynamic_cast<const mortscen::RangeError *>(&e))
        return "RangeError";
    if (dynamic_cast<const mortscen::UnknownCode *>(&e))
        return "UnknownCode";
    if (dynamic_cast<const mortscen::MalformedCode *>(&e))
        return "MalformedCode";
    if (dynamic_cast<const mortscen::RankDeficient *>(&e))
        return "RankDeficient";
    if (dynamic_cast<const mortscen::DegenerateSeries *>(&e))
        return "DegenerateSeries";
    if (dynamic_cast<const mortscen::DegenerateDenominator *>(&e))
        return "DegenerateDenominator";
    if (dynamic_cast<const mortscen::NonPositiveRate *>(&e))
        return "NonPositiveRate";
    if (dynamic_cast<const mortscen::MissingWhoCell *>(&e))
        return "MissingWhoCell";
    if (dynamic_cast<const mortscen::StatisticFailure *>(&e))
        return "StatisticFailure";
    if (dynamic_cast<const mortscen::InvalidArgument *>(&e))
        return "InvalidArgument";
    return "Error";
}

bool is_input_error(const std::string &kind) {
    return kind == "SchemaError" || kind == "GapError" || kind == "RangeError" ||
           kind == "UnknownCode" || kind == "MalformedCode" || kind == "MissingWhoCell" ||
           kind == "InvalidArgument";
}

void print_error(const std::string &kind, const std::string &message) {
    json doc;
    doc["error"] = {{"type", kind}, {"message", message}};
    std::cerr << doc.dump() << "\n";
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Cause-of-death mortality trends: breakpointed negative binomial fits,\n"
                 "counterfactual slowdown attribution and life-expectancy projections."};
    app.set_config("--config");
    app.fallthrough(); // let --out/--threads/--config appear after the subcommand

    CommonArgs args;
    app.add_option("--out", args.out_dir, "output directory")
        ->envname("MORTSCEN_OUT_DIR")
        ->capture_default_str();
    app.add_option("--threads", args.threads, "worker threads for cell fits and bootstrap")
        ->capture_default_str();

    auto add_common = [&](CLI::App *cmd, bool data, bool fits) {
        cmd->add_option("--sex", args.sex, "male or female")->capture_default_str();
        if (data) {
            cmd->add_option("--deaths", args.deaths, "deaths CSV");
            cmd->add_option("--exposures", args.exposures, "exposures CSV");
            cmd->add_option("--cause-format", args.cause_format,
                            "cause column interpretation: auto, group or icd10")
                ->capture_default_str();
        }
        if (fits)
            cmd->add_option("--fits", args.fits, "fit grid JSON from a previous `fit` run");
        cmd->add_option("--breakpoint", args.breakpoint, "trend break year")
            ->capture_default_str();
    };

    auto *validate = app.add_subcommand("validate", "check input files, reporting every issue");
    add_common(validate, true, false);

    auto *fit = app.add_subcommand("fit", "fit all age x cause cells, write the fit grid JSON");
    add_common(fit, true, false);

    auto *breakpoint_cmd =
        app.add_subcommand("breakpoint", "compare break models of the standardised-rate trend");
    add_common(breakpoint_cmd, true, false);
    breakpoint_cmd->add_option("--std-pop", args.std_pop, "standard population CSV");

    std::string scenario_label = "unadjusted";
    auto *asmr = app.add_subcommand("asmr", "scenario standardised-rate series and w summary");
    add_common(asmr, true, true);
    asmr->add_option("--std-pop", args.std_pop, "standard population CSV");
    asmr->add_option("--scenario", scenario_label, "unadjusted, all or cause:<CODE>")
        ->capture_default_str();

    int age_start = 0;
    auto *le = app.add_subcommand("le", "scenario life-expectancy series and pace summary");
    add_common(le, true, true);
    le->add_option("--scenario", scenario_label, "unadjusted, all or cause:<CODE>")
        ->capture_default_str();
    le->add_option("--age", age_start, "starting exact age (0 for birth)")
        ->capture_default_str();

    std::string measure = "asmr";
    auto *contrib = app.add_subcommand("contrib", "per-cause slowdown contribution table");
    add_common(contrib, true, true);
    contrib->add_option("--std-pop", args.std_pop, "standard population CSV");
    contrib->add_option("--measure", measure, "asmr or le")->capture_default_str();

    std::string stat_name = "w";
    int iterations = 5000;
    std::uint64_t seed = 42;
    double level = 0.95;
    auto *bootstrap = app.add_subcommand("bootstrap", "percentile interval for a statistic");
    add_common(bootstrap, true, true);
    bootstrap->add_option("--std-pop", args.std_pop, "standard population CSV");
    bootstrap->add_option("--stat", stat_name, "w, v0, v65, asmr:<year> or le<age>:<year>")
        ->capture_default_str();
    bootstrap->add_option("--scenario", scenario_label, "unadjusted, all or cause:<CODE>")
        ->capture_default_str();
    bootstrap->add_option("--iterations", iterations, "replicates")->capture_default_str();
    bootstrap->add_option("--seed", seed, "stream seed")->capture_default_str();
    bootstrap->add_option("--level", level, "central interval mass")->capture_default_str();

    std::string fs_label = "1";
    std::string who_path;
    int horizon_end = 2028;
    auto *project = app.add_subcommand("project", "future life-expectancy paths");
    add_common(project, true, true);
    project->add_option("--fs", fs_label, "1, 2:<CODE>, 3, 4:<z> or 5")->capture_default_str();
    project->add_option("--who", who_path, "external trend CSV (for --fs 5)");
    project->add_option("--age", age_start, "starting exact age")->capture_default_str();
    project->add_option("--horizon-end", horizon_end, "last projected year")
        ->capture_default_str();

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (validate->parsed())
            return run_validate(args);
        if (fit->parsed())
            return run_fit(args);
        if (breakpoint_cmd->parsed())
            return run_breakpoint(args);
        if (asmr->parsed())
            return run_asmr(args, scenario_label);
        if (le->parsed())
            return run_le(args, scenario_label, age_start);
        if (contrib->parsed())
            return run_contrib(args, measure);
        if (bootstrap->parsed())
            return run_bootstrap(args, stat_name, scenario_label, iterations, seed, level);
        if (project->parsed())
            return run_project(args, fs_label, who_path, age_start, horizon_end);
    } catch (const mortscen::Error &e) {
        const std::string kind = error_kind(e);
        print_error(kind, e.what());
        return is_input_error(kind) ? 2 : 1;
    } catch (const std::exception &e) {
        print_error("Error", e.what());
        return 1;
    }
    return 0;
}
