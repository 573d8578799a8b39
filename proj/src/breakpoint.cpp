#include "mortscen/breakpoint.hpp"

#include <cmath>
#include <fstream>

#include "mortscen/csv.hpp"
#include "mortscen/errors.hpp"

namespace mortscen {

std::vector<double> asmr_series(const MortalityDataset &ds, const StandardPopulation &sp) {
    std::vector<double> series;
    series.reserve(ds.years().size());
    for (int year = ds.years().first; year <= ds.years().last; ++year) {
        const double asmr = observed_asmr(ds, sp, year);
        if (!(asmr > 0.0))
            throw DegenerateSeries("age-standardised rate is zero in year " +
                                   std::to_string(year));
        series.push_back(std::log(asmr));
    }
    return series;
}

std::vector<int> default_break_grid(const std::vector<int> &years) {
    std::vector<int> grid;
    if (years.size() < 5)
        return grid;
    // Keep >= 2 years strictly before the break and >= 2 strictly after it.
    for (std::size_t i = 2; i + 2 < years.size(); ++i)
        grid.push_back(years[i]);
    return grid;
}

BreakpointSelection select_breakpoint(const std::vector<double> &series,
                                      const std::vector<int> &years,
                                      const std::vector<int> &grid) {
    if (series.size() != years.size())
        throw InvalidArgument("series and years must have equal length");
    for (int eps : grid) {
        int before = 0, after = 0;
        for (int t : years) {
            before += t < eps;
            after += t > eps;
        }
        if (before < 2 || after < 2)
            throw InvalidArgument("break year " + std::to_string(eps) +
                                  " leaves fewer than two observations on one side");
    }

    BreakpointSelection selection;
    selection.best_fit = ols_fit(series, years, DesignSpec{BreakKind::none, 0});
    selection.best = selection.best_fit.design;
    selection.table.push_back(BicEntry{selection.best, selection.best_fit.bic});

    // Candidates in tie-break order: earliest break year first, continuous
    // before discontinuous; only a strictly lower BIC replaces the incumbent.
    for (int eps : grid)
        for (BreakKind kind : {BreakKind::continuous, BreakKind::discontinuous}) {
            const DesignSpec design{kind, eps};
            const GaussianFit fit = ols_fit(series, years, design);
            selection.table.push_back(BicEntry{design, fit.bic});
            if (fit.bic < selection.best_fit.bic) {
                selection.best_fit = fit;
                selection.best = design;
            }
        }
    return selection;
}

BreakpointSelection select_breakpoint(const std::vector<double> &series,
                                      const std::vector<int> &years) {
    return select_breakpoint(series, years, default_break_grid(years));
}

void write_bic_table(const BreakpointSelection &selection, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out)
        throw SchemaError("cannot write file: " + path.string());
    out << "epsilon,kind,bic\n";
    for (const auto &entry : selection.table) {
        if (entry.design.kind == BreakKind::none)
            out << ",none," << csv::format_six(entry.bic) << "\n";
        else
            out << entry.design.epsilon << ',' << to_string(entry.design.kind) << ','
                << csv::format_six(entry.bic) << "\n";
    }
}

} // namespace mortscen
