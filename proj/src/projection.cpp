#include "mortscen/projection.hpp"

#include <cmath>

#include "mortscen/csv.hpp"
#include "mortscen/errors.hpp"

namespace mortscen {

WhoTrendTable::WhoTrendTable(Sex sex) : sex_(sex) {}

void WhoTrendTable::set(AgeGroup age, CauseGroup cause, double beta) {
    beta_[static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index()] = beta;
}

double WhoTrendTable::at(AgeGroup age, CauseGroup cause) const {
    const auto &cell =
        beta_[static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index()];
    if (!cell)
        throw MissingWhoCell("trend table lacks age " + age.label() + ", cause " +
                             cause.abbreviation() + " (" + to_string(sex_) + ")");
    return *cell;
}

bool WhoTrendTable::complete() const {
    for (const auto &cell : beta_)
        if (!cell)
            return false;
    return true;
}

WhoTrendTable load_who_trends(const std::filesystem::path &path, Sex sex) {
    auto rows = csv::read_table(path, "sex,age_group,cause,beta_who");
    WhoTrendTable table(sex);
    for (const auto &row : rows) {
        if (sex_from_string(row.fields[0]) != sex)
            continue;
        const AgeGroup age = AgeGroup::from_label(row.fields[1]);
        const CauseGroup cause = CauseGroup::from_code(row.fields[2]);
        table.set(age, cause, csv::parse_double(row.fields[3], "beta_who"));
    }
    return table;
}

FutureScenario FutureScenario::fs1(YearRange horizon) {
    FutureScenario fs;
    fs.horizon = horizon;
    return fs;
}

FutureScenario FutureScenario::fs2(CauseGroup cause, YearRange horizon) {
    FutureScenario fs;
    fs.kind = Kind::fs2_cause_reversion;
    fs.cause = cause;
    fs.horizon = horizon;
    return fs;
}

FutureScenario FutureScenario::fs3(YearRange horizon) {
    FutureScenario fs;
    fs.kind = Kind::fs3_all_reversion;
    fs.horizon = horizon;
    return fs;
}

FutureScenario FutureScenario::fs4(double improvement, YearRange horizon) {
    FutureScenario fs;
    fs.kind = Kind::fs4_flat_improvement;
    fs.improvement = improvement;
    fs.horizon = horizon;
    return fs;
}

FutureScenario FutureScenario::fs5(WhoTrendTable who, YearRange horizon) {
    FutureScenario fs;
    fs.kind = Kind::fs5_external;
    fs.who = std::move(who);
    fs.horizon = horizon;
    return fs;
}

std::string FutureScenario::label() const {
    switch (kind) {
    case Kind::fs1_constant:
        return "fs1";
    case Kind::fs2_cause_reversion:
        return "fs2:" + cause.abbreviation();
    case Kind::fs3_all_reversion:
        return "fs3";
    case Kind::fs4_flat_improvement:
        return "fs4:" + csv::format_exact(improvement);
    default:
        return "fs5";
    }
}

std::array<double, AgeGroup::count * CauseGroup::count> beta4_grid(const FitSurface &surface,
                                                                   const FutureScenario &fs) {
    if (fs.kind == FutureScenario::Kind::fs4_flat_improvement &&
        !(fs.improvement >= 0.0 && fs.improvement < 1.0))
        throw InvalidArgument("flat improvement must lie in [0, 1)");
    if (fs.kind == FutureScenario::Kind::fs5_external && !fs.who)
        throw InvalidArgument("external-trend scenario needs a trend table");

    std::array<double, AgeGroup::count * CauseGroup::count> grid{};
    for (const auto &age : AgeGroup::all())
        for (const auto &cause : CauseGroup::all()) {
            const std::size_t i =
                static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index();
            const CellFit &cell = surface.fit(age, cause);
            if (cell.zeroed) {
                grid[i] = 0.0;
                continue;
            }
            switch (fs.kind) {
            case FutureScenario::Kind::fs1_constant:
                grid[i] = 0.0;
                break;
            case FutureScenario::Kind::fs2_cause_reversion:
                grid[i] = cause == fs.cause ? -(*cell.beta)[2] : 0.0;
                break;
            case FutureScenario::Kind::fs3_all_reversion:
                grid[i] = -(*cell.beta)[2];
                break;
            case FutureScenario::Kind::fs4_flat_improvement:
                grid[i] = std::log(1.0 - fs.improvement);
                break;
            case FutureScenario::Kind::fs5_external:
                grid[i] = fs.who->at(age, cause) - ((*cell.beta)[1] + (*cell.beta)[2]);
                break;
            }
        }
    return grid;
}

double projected_rate(const FitSurface &surface,
                      const std::array<double, AgeGroup::count * CauseGroup::count> &beta4,
                      AgeGroup age, CauseGroup cause, int year) {
    const int anchor = surface.years().last;
    if (year < anchor)
        throw InvalidArgument("projection year " + std::to_string(year) +
                              " precedes the fitted window end " + std::to_string(anchor));
    const CellFit &cell = surface.fit(age, cause);
    if (cell.zeroed)
        return 0.0;
    const double fitted = scenario_cell_rate(cell, year, false);
    const std::size_t i =
        static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index();
    return fitted * std::exp(beta4[i] * (year - anchor));
}

std::vector<LifeTableResult> project_le_path(const FitSurface &surface,
                                             const FutureScenario &fs, int h) {
    if (fs.horizon.first <= surface.years().last)
        throw InvalidArgument("projection horizon must start after the fitted window");
    if (fs.horizon.last > kHorizonCap)
        throw InvalidArgument("projection horizon exceeds the " + std::to_string(kHorizonCap) +
                              " cap");
    const auto grid = beta4_grid(surface, fs);

    std::vector<LifeTableResult> path;
    path.reserve(fs.horizon.size());
    for (int year = fs.horizon.first; year <= fs.horizon.last; ++year) {
        BandRates rates{};
        for (const auto &age : AgeGroup::all()) {
            double total = 0.0;
            for (const auto &cause : CauseGroup::all())
                total += projected_rate(surface, grid, age, cause, year);
            rates[age.index()] = total;
        }
        LifeTableResult result = period_life_expectancy(rates, h);
        path.push_back(std::move(result));
    }
    return path;
}

} // namespace mortscen
