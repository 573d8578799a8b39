#include "mortscen/scenarios.hpp"

#include <cmath>

#include "mortscen/errors.hpp"
#include "mortscen/parallel.hpp"

namespace mortscen {

std::string ScenarioSpec::label() const {
    switch (kind) {
    case Kind::unadjusted:
        return "unadjusted";
    case Kind::all_adjusted:
        return "all";
    default:
        return "cause:" + cause.abbreviation();
    }
}

ScenarioSpec ScenarioSpec::from_label(const std::string &label) {
    if (label == "unadjusted")
        return unadjusted();
    if (label == "all")
        return revert_all();
    if (label.rfind("cause:", 0) == 0)
        return revert_cause(CauseGroup::from_code(label.substr(6)));
    throw InvalidArgument("unrecognised scenario '" + label +
                          "' (expected unadjusted, all or cause:<CODE>)");
}

FitSurface::FitSurface(Sex sex, YearRange years, int breakpoint)
    : sex_(sex), years_(years), breakpoint_(breakpoint) {}

const CellFit &FitSurface::fit(AgeGroup age, CauseGroup cause) const {
    return cells_[static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index()];
}

CellFit &FitSurface::fit(AgeGroup age, CauseGroup cause) {
    return cells_[static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index()];
}

FitSurface fit_surface(const MortalityDataset &ds, int breakpoint, int threads) {
    ds.require_complete();
    FitSurface surface(ds.sex(), ds.years(), breakpoint);

    std::vector<int> years;
    for (int t = ds.years().first; t <= ds.years().last; ++t)
        years.push_back(t);

    const auto &ages = AgeGroup::all();
    const auto &causes = CauseGroup::all();
    parallel_for(static_cast<std::size_t>(AgeGroup::count) * CauseGroup::count, threads,
                 [&](std::size_t i) {
                     const AgeGroup age = ages[i / CauseGroup::count];
                     const CauseGroup cause = causes[i % CauseGroup::count];
                     std::vector<std::int64_t> counts;
                     std::vector<double> exposures;
                     counts.reserve(years.size());
                     exposures.reserve(years.size());
                     for (int t : years) {
                         counts.push_back(ds.deaths(age, cause, t));
                         exposures.push_back(ds.exposure(age, t));
                     }
                     surface.fit(age, cause) = nb_glm_fit(counts, exposures, years, breakpoint);
                 });
    return surface;
}

double scenario_cell_rate(const CellFit &cell, int year, bool adjusted) {
    if (cell.zeroed)
        return 0.0;
    const auto &b = *cell.beta;
    double eta = b[0] + b[1] * year;
    if (year >= cell.breakpoint) {
        if (!adjusted)
            eta += b[2] * (year - cell.breakpoint);
        eta += b[3];
    }
    return std::exp(eta);
}

double fitted_rate(const FitSurface &surface, AgeGroup age, CauseGroup cause, int year) {
    return scenario_cell_rate(surface.fit(age, cause), year, false);
}

double scenario_rate(const FitSurface &surface, const ScenarioSpec &spec, AgeGroup age,
                     int year) {
    double rate = 0.0;
    for (const auto &cause : CauseGroup::all())
        rate += scenario_cell_rate(surface.fit(age, cause), year, spec.adjusts(cause));
    return rate;
}

double scenario_asmr(const FitSurface &surface, const ScenarioSpec &spec,
                     const StandardPopulation &sp, int year) {
    double numerator = 0.0;
    for (const auto &age : AgeGroup::all())
        numerator += scenario_rate(surface, spec, age, year) * sp.weight(age);
    return numerator / sp.total();
}

std::vector<double> scenario_asmr_series(const FitSurface &surface, const ScenarioSpec &spec,
                                         const StandardPopulation &sp, YearRange window) {
    std::vector<double> series;
    series.reserve(window.size());
    for (int year = window.first; year <= window.last; ++year) {
        const double asmr = scenario_asmr(surface, spec, sp, year);
        if (!(asmr > 0.0))
            throw DegenerateSeries("scenario age-standardised rate is zero in year " +
                                   std::to_string(year));
        series.push_back(std::log(asmr));
    }
    return series;
}

ImprovementSummary improvement_slope(const std::vector<double> &log_series, YearRange window) {
    if (static_cast<int>(log_series.size()) != window.size())
        throw InvalidArgument("series length does not match the year window");
    std::vector<int> years;
    for (int t = window.first; t <= window.last; ++t)
        years.push_back(t);
    const GaussianFit line = ols_fit(log_series, years, DesignSpec{BreakKind::none, 0});

    ImprovementSummary summary;
    summary.window = window;
    summary.value = -line.beta[1];
    summary.intercept = line.beta[0] + line.beta[1] * window.first;
    return summary;
}

double contribution_asmr(double w_obs, double w_k, double w_all) {
    const double denominator = w_all - w_obs;
    if (denominator == 0.0)
        throw DegenerateDenominator(
            "all-cause reverted improvement equals the baseline improvement");
    return (w_k - w_obs) / denominator;
}

ContributionTable asmr_contributions(const FitSurface &surface, const StandardPopulation &sp,
                                     YearRange window) {
    ContributionTable table;
    table.baseline =
        improvement_slope(scenario_asmr_series(surface, ScenarioSpec::unadjusted(), sp, window),
                          window)
            .value;
    table.all_adjusted =
        improvement_slope(scenario_asmr_series(surface, ScenarioSpec::revert_all(), sp, window),
                          window)
            .value;
    for (const auto &cause : CauseGroup::all()) {
        const auto spec = ScenarioSpec::revert_cause(cause);
        table.adjusted[cause.index()] =
            improvement_slope(scenario_asmr_series(surface, spec, sp, window), window).value;
        table.share[cause.index()] =
            contribution_asmr(table.baseline, table.adjusted[cause.index()], table.all_adjusted);
    }
    return table;
}

} // namespace mortscen
