#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mortscen/lifetable.hpp"
#include "mortscen/scenarios.hpp"

namespace mortscen {

/// Person-year exposures by age band and year (the denominator grid the
/// simulated counts are scaled against).
class ExposureGrid {
  public:
    ExposureGrid() = default;
    ExposureGrid(YearRange years, std::vector<double> values);

    static ExposureGrid from_dataset(const MortalityDataset &ds);

    const YearRange &years() const noexcept { return years_; }
    double at(AgeGroup age, int year) const;

  private:
    YearRange years_{2001, 2018};
    std::vector<double> values_; // [age][year]
};

/// All-cause rate grid a bootstrap statistic is evaluated on.
struct RateSurface {
    YearRange years{2001, 2018};
    std::vector<double> values; // [age][year]

    double at(AgeGroup age, int year) const {
        return values[static_cast<std::size_t>(age.index()) * years.size() +
                      (year - years.first)];
    }
};

/// A scalar functional of an all-cause rate grid.
struct Statistic {
    std::string name;
    std::function<double(const RateSurface &)> eval;
};

/// Improvement of log standardised mortality over a window (the w summary).
Statistic asmr_slope_statistic(const StandardPopulation &sp, YearRange window = {2011, 2018});
/// Pace of life-expectancy gain at age h in months per year (the v summary).
Statistic le_slope_statistic(int age_start, YearRange window = {2011, 2018});
/// Standardised rate level in one year.
Statistic asmr_level_statistic(const StandardPopulation &sp, int year);
/// Life expectancy level at age h in one year.
Statistic le_level_statistic(int age_start, int year);

/// Parse "w", "v0", "v65", "asmr:<year>" or "le<age>:<year>".
Statistic statistic_by_name(const std::string &name, const StandardPopulation &sp);

struct BootstrapConfig {
    int iterations = 5000;
    std::uint64_t seed = 42;
    double level = 0.95;                              ///< central CI mass
    ScenarioSpec scenario = ScenarioSpec::unadjusted();
    int threads = 1;
};

struct BootstrapResult {
    std::string statistic;
    double point = 0.0;   ///< statistic of the (non-simulated) scenario rates
    double level = 0.95;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
    std::vector<double> replicates; ///< in iteration order, schedule independent
};

/// One parametric replicate: counts drawn cell-wise from the negative
/// binomial implied by the (scenario-adjusted) fitted means and dispersions,
/// via a gamma-mixed Poisson. Zeroed cells always produce zero. The stream
/// is keyed by (seed, iteration), so any parallel schedule reproduces the
/// same grid.
MortalityDataset simulate_counts(const FitSurface &surface, const ExposureGrid &exposures,
                                 std::uint64_t seed, int iteration,
                                 const ScenarioSpec &scenario = ScenarioSpec::unadjusted());

/// Percentile bootstrap interval for `statistic`. CI endpoints are order
/// statistics of the replicate vector. Throws StatisticFailure (carrying the
/// iteration index) if any replicate cannot be evaluated.
BootstrapResult bootstrap_ci(const FitSurface &surface, const ExposureGrid &exposures,
                             const Statistic &statistic, const BootstrapConfig &config);

} // namespace mortscen
