#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mortscen/age.hpp"
#include "mortscen/cause.hpp"

namespace mortscen {

enum class Sex { male, female };

std::string to_string(Sex sex);
Sex sex_from_string(std::string_view text);

/// Inclusive calendar-year interval.
struct YearRange {
    int first = 2001;
    int last = 2018;

    int size() const noexcept { return last - first + 1; }
    bool contains(int year) const noexcept { return year >= first && year <= last; }
};

/// Death counts by age band, cause group and year, with matching person-year
/// exposures, for a single sex.
class MortalityDataset {
  public:
    MortalityDataset(Sex sex, YearRange years);

    Sex sex() const noexcept { return sex_; }
    const YearRange &years() const noexcept { return years_; }

    std::int64_t deaths(AgeGroup age, CauseGroup cause, int year) const;
    std::int64_t all_cause_deaths(AgeGroup age, int year) const;
    double exposure(AgeGroup age, int year) const;

    void set_deaths(AgeGroup age, CauseGroup cause, int year, std::int64_t value);
    void add_deaths(AgeGroup age, CauseGroup cause, int year, std::int64_t value);
    void set_exposure(AgeGroup age, int year, double value);

    /// True once every (age, year) exposure has been assigned a positive value.
    bool exposures_complete() const;

    /// Throws GapError naming the first missing exposure cell, if any.
    void require_complete() const;

  private:
    int year_index(int year) const;

    Sex sex_;
    YearRange years_;
    std::vector<std::int64_t> deaths_;   // [age][cause][year]
    std::vector<double> exposures_;      // [age][year], NaN = unset
};

/// External standard population weights over the 19 age bands.
class StandardPopulation {
  public:
    StandardPopulation() = default;
    explicit StandardPopulation(std::vector<double> weights);

    double weight(AgeGroup age) const { return weights_[age.index()]; }
    double total() const;

  private:
    std::vector<double> weights_ = std::vector<double>(AgeGroup::count, 0.0);
};

/// Crude death rate for one cell: deaths / exposure.
double observed_rate(const MortalityDataset &ds, AgeGroup age, CauseGroup cause, int year);

/// All-cause death rate for one age band: total deaths / exposure.
double observed_rate(const MortalityDataset &ds, AgeGroup age, int year);

/// Age-standardised all-cause mortality rate for one year: the
/// exposure-weighted average of band rates under the standard population.
double observed_asmr(const MortalityDataset &ds, const StandardPopulation &sp, int year);

} // namespace mortscen
