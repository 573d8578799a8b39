#include "mortscen/lifetable.hpp"

#include <cmath>

#include "mortscen/errors.hpp"

namespace mortscen {

namespace {

double single_age_rate(const BandRates &rates, int age) {
    return rates[AgeGroup::of_age(age).index()];
}

void require_positive_from(const BandRates &rates, int h) {
    const int first_band = AgeGroup::of_age(h).index();
    for (int b = first_band; b < AgeGroup::count; ++b)
        if (!(rates[b] > 0.0))
            throw NonPositiveRate("non-positive all-cause rate in age band " +
                                  AgeGroup::from_index(b).label());
}

} // namespace

double survival_prob(const BandRates &rates, int h, int n) {
    if (h < 0)
        throw InvalidArgument("age must be non-negative");
    if (n < 0)
        throw InvalidArgument("horizon must be non-negative");
    double hazard = 0.0;
    for (int i = 0; i < n; ++i)
        hazard += single_age_rate(rates, h + i);
    return std::exp(-hazard);
}

LifeTableResult period_life_expectancy(const BandRates &rates, int h) {
    if (h < 0)
        throw InvalidArgument("age must be non-negative");
    require_positive_from(rates, h);

    LifeTableResult result;
    result.age_start = h;

    // Survivorship is summed explicitly up to the open band; from age 85 on
    // the constant rate makes the remaining sum geometric.
    const int closed_years = std::max(0, 85 - h);
    double hazard = 0.0;
    double sum = 0.0;
    result.survival.reserve(closed_years);
    for (int n = 1; n <= closed_years; ++n) {
        hazard += single_age_rate(rates, h + n - 1);
        const double p = std::exp(-hazard);
        result.survival.push_back(p);
        sum += p;
    }
    const double to_open = closed_years > 0 ? result.survival.back() : 1.0;
    const double p_open = std::exp(-rates[AgeGroup::count - 1]);
    result.e_complete = sum + to_open * p_open / (1.0 - p_open) + 0.5;
    return result;
}

BandRates scenario_band_rates(const FitSurface &surface, const ScenarioSpec &spec, int year) {
    BandRates rates{};
    for (const auto &age : AgeGroup::all())
        rates[age.index()] = scenario_rate(surface, spec, age, year);
    return rates;
}

std::vector<double> le_series(const FitSurface &surface, const ScenarioSpec &spec, int h,
                              YearRange window) {
    std::vector<double> values;
    values.reserve(window.size());
    for (int year = window.first; year <= window.last; ++year)
        values.push_back(
            period_life_expectancy(scenario_band_rates(surface, spec, year), h).e_complete);
    return values;
}

ImprovementSummary le_slope(const std::vector<double> &le_values, YearRange window) {
    if (static_cast<int>(le_values.size()) != window.size())
        throw InvalidArgument("series length does not match the year window");
    std::vector<int> years;
    for (int t = window.first; t <= window.last; ++t)
        years.push_back(t);
    const GaussianFit line = ols_fit(le_values, years, DesignSpec{BreakKind::none, 0});

    ImprovementSummary summary;
    summary.window = window;
    summary.value = 12.0 * line.beta[1];
    summary.intercept = line.beta[0] + line.beta[1] * window.first;
    return summary;
}

double contribution_le(double v_obs, double v_k, double v_all) {
    const double denominator = v_all - v_obs;
    if (denominator == 0.0)
        throw DegenerateDenominator(
            "all-cause reverted pace equals the baseline pace of gain");
    return (v_k - v_obs) / denominator;
}

ContributionTable le_contributions(const FitSurface &surface, int h, YearRange window) {
    ContributionTable table;
    table.baseline =
        le_slope(le_series(surface, ScenarioSpec::unadjusted(), h, window), window).value;
    table.all_adjusted =
        le_slope(le_series(surface, ScenarioSpec::revert_all(), h, window), window).value;
    for (const auto &cause : CauseGroup::all()) {
        const auto spec = ScenarioSpec::revert_cause(cause);
        table.adjusted[cause.index()] =
            le_slope(le_series(surface, spec, h, window), window).value;
        table.share[cause.index()] =
            contribution_le(table.baseline, table.adjusted[cause.index()], table.all_adjusted);
    }
    return table;
}

} // namespace mortscen
