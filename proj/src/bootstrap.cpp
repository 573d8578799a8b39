#include "mortscen/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mortscen/errors.hpp"
#include "mortscen/parallel.hpp"

namespace mortscen {

namespace {

std::uint64_t splitmix64(std::uint64_t &state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent engine per (seed, iteration) pair; the iteration owns its
/// whole stream, so the draw sequence never depends on thread scheduling.
std::mt19937_64 stream_engine(std::uint64_t seed, int iteration) {
    std::uint64_t state = seed;
    std::uint64_t a = splitmix64(state);
    state ^= 0x6a09e667f3bcc909ULL + static_cast<std::uint64_t>(iteration);
    std::uint64_t b = splitmix64(state);
    return std::mt19937_64(a ^ (b + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(iteration) + 1)));
}

std::int64_t draw_nb(std::mt19937_64 &rng, double mu, double theta) {
    // Gamma-mixed Poisson: lambda ~ Gamma(theta, mu/theta), count ~ Poisson(lambda).
    std::gamma_distribution<double> gamma(theta, mu / theta);
    const double lambda = gamma(rng);
    if (!(lambda > 0.0))
        return 0;
    std::poisson_distribution<std::int64_t> poisson(lambda);
    return poisson(rng);
}

RateSurface all_cause_rates(const MortalityDataset &ds) {
    RateSurface rates;
    rates.years = ds.years();
    rates.values.resize(static_cast<std::size_t>(AgeGroup::count) * ds.years().size());
    for (const auto &age : AgeGroup::all())
        for (int year = ds.years().first; year <= ds.years().last; ++year)
            rates.values[static_cast<std::size_t>(age.index()) * ds.years().size() +
                         (year - ds.years().first)] = observed_rate(ds, age, year);
    return rates;
}

RateSurface fitted_scenario_rates(const FitSurface &surface, const ScenarioSpec &scenario) {
    RateSurface rates;
    rates.years = surface.years();
    rates.values.resize(static_cast<std::size_t>(AgeGroup::count) * rates.years.size());
    for (const auto &age : AgeGroup::all())
        for (int year = rates.years.first; year <= rates.years.last; ++year)
            rates.values[static_cast<std::size_t>(age.index()) * rates.years.size() +
                         (year - rates.years.first)] =
                scenario_rate(surface, scenario, age, year);
    return rates;
}

BandRates band_rates_at(const RateSurface &rates, int year) {
    BandRates bands{};
    for (const auto &age : AgeGroup::all())
        bands[age.index()] = rates.at(age, year);
    return bands;
}

} // namespace

ExposureGrid::ExposureGrid(YearRange years, std::vector<double> values)
    : years_(years), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(AgeGroup::count) * years_.size())
        throw InvalidArgument("exposure grid has the wrong shape");
    for (double v : values_)
        if (!(v > 0.0))
            throw InvalidArgument("exposures must be positive");
}

ExposureGrid ExposureGrid::from_dataset(const MortalityDataset &ds) {
    std::vector<double> values(static_cast<std::size_t>(AgeGroup::count) * ds.years().size());
    for (const auto &age : AgeGroup::all())
        for (int year = ds.years().first; year <= ds.years().last; ++year)
            values[static_cast<std::size_t>(age.index()) * ds.years().size() +
                   (year - ds.years().first)] = ds.exposure(age, year);
    return ExposureGrid(ds.years(), std::move(values));
}

double ExposureGrid::at(AgeGroup age, int year) const {
    if (!years_.contains(year))
        throw RangeError("year " + std::to_string(year) + " outside the exposure grid");
    return values_[static_cast<std::size_t>(age.index()) * years_.size() +
                   (year - years_.first)];
}

Statistic asmr_slope_statistic(const StandardPopulation &sp, YearRange window) {
    Statistic stat;
    stat.name = "w";
    stat.eval = [sp, window](const RateSurface &rates) {
        std::vector<double> series;
        series.reserve(window.size());
        for (int year = window.first; year <= window.last; ++year) {
            double numerator = 0.0;
            for (const auto &age : AgeGroup::all())
                numerator += rates.at(age, year) * sp.weight(age);
            const double asmr = numerator / sp.total();
            if (!(asmr > 0.0))
                throw DegenerateSeries("standardised rate is zero in year " +
                                       std::to_string(year));
            series.push_back(std::log(asmr));
        }
        return improvement_slope(series, window).value;
    };
    return stat;
}

Statistic le_slope_statistic(int age_start, YearRange window) {
    Statistic stat;
    stat.name = "v" + std::to_string(age_start);
    stat.eval = [age_start, window](const RateSurface &rates) {
        std::vector<double> values;
        values.reserve(window.size());
        for (int year = window.first; year <= window.last; ++year)
            values.push_back(
                period_life_expectancy(band_rates_at(rates, year), age_start).e_complete);
        return le_slope(values, window).value;
    };
    return stat;
}

Statistic asmr_level_statistic(const StandardPopulation &sp, int year) {
    Statistic stat;
    stat.name = "asmr:" + std::to_string(year);
    stat.eval = [sp, year](const RateSurface &rates) {
        double numerator = 0.0;
        for (const auto &age : AgeGroup::all())
            numerator += rates.at(age, year) * sp.weight(age);
        return numerator / sp.total();
    };
    return stat;
}

Statistic le_level_statistic(int age_start, int year) {
    Statistic stat;
    stat.name = "le" + std::to_string(age_start) + ":" + std::to_string(year);
    stat.eval = [age_start, year](const RateSurface &rates) {
        return period_life_expectancy(band_rates_at(rates, year), age_start).e_complete;
    };
    return stat;
}

Statistic statistic_by_name(const std::string &name, const StandardPopulation &sp) {
    if (name == "w")
        return asmr_slope_statistic(sp);
    if (name == "v0")
        return le_slope_statistic(0);
    if (name == "v65")
        return le_slope_statistic(65);
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
        const std::string head = name.substr(0, colon);
        const int year = std::stoi(name.substr(colon + 1));
        if (head == "asmr")
            return asmr_level_statistic(sp, year);
        if (head.rfind("le", 0) == 0)
            return le_level_statistic(std::stoi(head.substr(2)), year);
    }
    throw InvalidArgument("unrecognised statistic '" + name +
                          "' (expected w, v0, v65, asmr:<year> or le<age>:<year>)");
}

MortalityDataset simulate_counts(const FitSurface &surface, const ExposureGrid &exposures,
                                 std::uint64_t seed, int iteration,
                                 const ScenarioSpec &scenario) {
    MortalityDataset simulated(surface.sex(), surface.years());
    std::mt19937_64 rng = stream_engine(seed, iteration);
    // Fixed traversal order (age, cause, year) keeps the stream layout stable.
    for (const auto &age : AgeGroup::all()) {
        for (const auto &cause : CauseGroup::all()) {
            const CellFit &cell = surface.fit(age, cause);
            const bool adjusted = scenario.adjusts(cause);
            for (int year = surface.years().first; year <= surface.years().last; ++year) {
                std::int64_t count = 0;
                if (!cell.zeroed) {
                    const double mu =
                        exposures.at(age, year) * scenario_cell_rate(cell, year, adjusted);
                    count = draw_nb(rng, mu, *cell.theta);
                }
                simulated.set_deaths(age, cause, year, count);
            }
        }
        for (int year = surface.years().first; year <= surface.years().last; ++year)
            simulated.set_exposure(age, year, exposures.at(age, year));
    }
    return simulated;
}

BootstrapResult bootstrap_ci(const FitSurface &surface, const ExposureGrid &exposures,
                             const Statistic &statistic, const BootstrapConfig &config) {
    if (config.iterations < 1)
        throw InvalidArgument("bootstrap needs at least one iteration");
    if (!(config.level > 0.0 && config.level < 1.0))
        throw InvalidArgument("confidence level must lie strictly inside (0, 1)");

    BootstrapResult result;
    result.statistic = statistic.name;
    result.level = config.level;
    result.iterations = config.iterations;
    result.seed = config.seed;
    result.point = statistic.eval(fitted_scenario_rates(surface, config.scenario));

    result.replicates.assign(config.iterations, 0.0);
    std::vector<std::string> failures(config.iterations);
    parallel_for(static_cast<std::size_t>(config.iterations), config.threads,
                 [&](std::size_t i) {
                     try {
                         const MortalityDataset replicate = simulate_counts(
                             surface, exposures, config.seed, static_cast<int>(i),
                             config.scenario);
                         result.replicates[i] = statistic.eval(all_cause_rates(replicate));
                     } catch (const std::exception &e) {
                         failures[i] = e.what();
                     }
                 });
    for (int i = 0; i < config.iterations; ++i)
        if (!failures[i].empty())
            throw StatisticFailure("bootstrap iteration " + std::to_string(i) + ": " +
                                       failures[i],
                                   i);

    // Percentile interval with nearest-rank order statistics.
    std::vector<double> sorted = result.replicates;
    std::sort(sorted.begin(), sorted.end());
    const double alpha = 1.0 - config.level;
    auto order_stat = [&](double q) {
        const auto rank = static_cast<std::ptrdiff_t>(
            std::ceil(q * static_cast<double>(sorted.size())));
        const auto index = std::clamp<std::ptrdiff_t>(rank - 1, 0,
                                                      static_cast<std::ptrdiff_t>(sorted.size()) - 1);
        return sorted[static_cast<std::size_t>(index)];
    };
    result.ci_low = order_stat(alpha / 2.0);
    result.ci_high = order_stat(1.0 - alpha / 2.0);
    return result;
}

} // namespace mortscen
