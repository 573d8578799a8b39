#pragma once

#include <array>
#include <vector>

#include "mortscen/scenarios.hpp"

namespace mortscen {

/// All-cause death rates per age band for one year.
using BandRates = std::array<double, AgeGroup::count>;

/// Probability of surviving n further whole years from exact age h, under
/// rates held constant within each age band:
///   p = exp(-sum of the single-age rates for ages h .. h+n-1).
double survival_prob(const BandRates &rates, int h, int n);

struct LifeTableResult {
    int age_start = 0;
    double e_complete = 0.0;       ///< period life expectancy at age_start
    std::vector<double> survival;  ///< survival[n-1] = n-year survival, n = 1 .. 85-age_start
};

/// Period life expectancy at exact age h: the survivorship sum evaluated in
/// closed form, with the open 85+ band contributing a geometric tail
///   S * p / (1 - p),  p = exp(-m85),
/// plus the half-year begun-period correction. Every band rate covering ages
/// >= h must be positive (NonPositiveRate otherwise; a zero open-band rate
/// would make the tail diverge).
LifeTableResult period_life_expectancy(const BandRates &rates, int h);

/// Scenario all-cause band rates for one year.
BandRates scenario_band_rates(const FitSurface &surface, const ScenarioSpec &spec, int year);

/// Period life expectancy at age h per year of `window`, under scenario rates.
std::vector<double> le_series(const FitSurface &surface, const ScenarioSpec &spec, int h,
                              YearRange window);

/// Pace of life-expectancy gain over a window: the least-squares slope of the
/// yearly values, expressed in months per year (x12, no sign flip).
ImprovementSummary le_slope(const std::vector<double> &le_values, YearRange window);

/// Share of the life-expectancy gap attributable to one cause:
/// (v_k - v_obs) / (v_all - v_obs). Throws DegenerateDenominator when
/// v_all == v_obs.
double contribution_le(double v_obs, double v_k, double v_all);

/// Life-expectancy pace summaries for every scenario plus per-cause shares.
ContributionTable le_contributions(const FitSurface &surface, int h,
                                   YearRange window = {2011, 2018});

} // namespace mortscen
