#include "mortscen/dataset.hpp"

#include <cmath>
#include <limits>

#include "mortscen/errors.hpp"

namespace mortscen {

std::string to_string(Sex sex) { return sex == Sex::male ? "male" : "female"; }

Sex sex_from_string(std::string_view text) {
    if (text == "male" || text == "M" || text == "m")
        return Sex::male;
    if (text == "female" || text == "F" || text == "f")
        return Sex::female;
    throw SchemaError("unrecognised sex: '" + std::string(text) + "'");
}

MortalityDataset::MortalityDataset(Sex sex, YearRange years)
    : sex_(sex), years_(years),
      deaths_(static_cast<std::size_t>(AgeGroup::count) * CauseGroup::count * years.size(), 0),
      exposures_(static_cast<std::size_t>(AgeGroup::count) * years.size(),
                 std::numeric_limits<double>::quiet_NaN()) {
    if (years.last < years.first)
        throw InvalidArgument("year range is empty");
}

int MortalityDataset::year_index(int year) const {
    if (!years_.contains(year))
        throw RangeError("year " + std::to_string(year) + " outside study span " +
                         std::to_string(years_.first) + "-" + std::to_string(years_.last));
    return year - years_.first;
}

std::int64_t MortalityDataset::deaths(AgeGroup age, CauseGroup cause, int year) const {
    const std::size_t t = static_cast<std::size_t>(year_index(year));
    return deaths_[(static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index()) *
                       years_.size() +
                   t];
}

std::int64_t MortalityDataset::all_cause_deaths(AgeGroup age, int year) const {
    std::int64_t total = 0;
    for (const auto &cause : CauseGroup::all())
        total += deaths(age, cause, year);
    return total;
}

double MortalityDataset::exposure(AgeGroup age, int year) const {
    const std::size_t t = static_cast<std::size_t>(year_index(year));
    double value = exposures_[static_cast<std::size_t>(age.index()) * years_.size() + t];
    if (std::isnan(value))
        throw GapError("missing exposure for age " + age.label() + ", year " +
                       std::to_string(year));
    return value;
}

void MortalityDataset::set_deaths(AgeGroup age, CauseGroup cause, int year, std::int64_t value) {
    if (value < 0)
        throw SchemaError("negative death count");
    const std::size_t t = static_cast<std::size_t>(year_index(year));
    deaths_[(static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index()) *
                years_.size() +
            t] = value;
}

void MortalityDataset::add_deaths(AgeGroup age, CauseGroup cause, int year, std::int64_t value) {
    if (value < 0)
        throw SchemaError("negative death count");
    const std::size_t t = static_cast<std::size_t>(year_index(year));
    deaths_[(static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index()) *
                years_.size() +
            t] += value;
}

void MortalityDataset::set_exposure(AgeGroup age, int year, double value) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw SchemaError("exposure must be positive and finite for age " + age.label() +
                          ", year " + std::to_string(year));
    const std::size_t t = static_cast<std::size_t>(year_index(year));
    exposures_[static_cast<std::size_t>(age.index()) * years_.size() + t] = value;
}

bool MortalityDataset::exposures_complete() const {
    for (double value : exposures_)
        if (std::isnan(value))
            return false;
    return true;
}

void MortalityDataset::require_complete() const {
    for (const auto &age : AgeGroup::all())
        for (int year = years_.first; year <= years_.last; ++year) {
            double value = exposures_[static_cast<std::size_t>(age.index()) * years_.size() +
                                      (year - years_.first)];
            if (std::isnan(value))
                throw GapError("missing exposure for age " + age.label() + ", year " +
                               std::to_string(year));
        }
}

StandardPopulation::StandardPopulation(std::vector<double> weights)
    : weights_(std::move(weights)) {
    if (weights_.size() != AgeGroup::count)
        throw SchemaError("standard population must cover all " +
                          std::to_string(AgeGroup::count) + " age bands, got " +
                          std::to_string(weights_.size()));
    for (double w : weights_)
        if (!(w > 0.0) || !std::isfinite(w))
            throw SchemaError("standard population weights must be positive");
}

double StandardPopulation::total() const {
    double sum = 0.0;
    for (double w : weights_)
        sum += w;
    return sum;
}

double observed_rate(const MortalityDataset &ds, AgeGroup age, CauseGroup cause, int year) {
    return static_cast<double>(ds.deaths(age, cause, year)) / ds.exposure(age, year);
}

double observed_rate(const MortalityDataset &ds, AgeGroup age, int year) {
    return static_cast<double>(ds.all_cause_deaths(age, year)) / ds.exposure(age, year);
}

double observed_asmr(const MortalityDataset &ds, const StandardPopulation &sp, int year) {
    double numerator = 0.0;
    for (const auto &age : AgeGroup::all())
        numerator += observed_rate(ds, age, year) * sp.weight(age);
    return numerator / sp.total();
}

} // namespace mortscen
