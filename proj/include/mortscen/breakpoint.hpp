#pragma once

#include <filesystem>
#include <vector>

#include "mortscen/dataset.hpp"
#include "mortscen/regression.hpp"

namespace mortscen {

/// Log age-standardised all-cause mortality, one value per study year.
/// Throws DegenerateSeries when a year has zero deaths everywhere (its
/// logarithm would be undefined).
std::vector<double> asmr_series(const MortalityDataset &ds, const StandardPopulation &sp);

struct BicEntry {
    DesignSpec design;
    double bic = 0.0;
};

struct BreakpointSelection {
    DesignSpec best;           ///< winning design (kind none has no meaningful epsilon)
    GaussianFit best_fit;
    std::vector<BicEntry> table; ///< the straight-line entry plus one per (epsilon, kind)
};

/// Candidate break years for an 18-year window: each side keeps at least
/// two observations.
std::vector<int> default_break_grid(const std::vector<int> &years);

/// Exhaustive BIC comparison of the straight-line model against continuous
/// and discontinuous breaks at every grid year. Ties prefer, in order: no
/// break, the earliest break year, the continuous kind.
BreakpointSelection select_breakpoint(const std::vector<double> &series,
                                      const std::vector<int> &years,
                                      const std::vector<int> &grid);

BreakpointSelection select_breakpoint(const std::vector<double> &series,
                                      const std::vector<int> &years);

/// Write the comparison table as CSV: epsilon,kind,bic (epsilon empty for
/// the straight-line row).
void write_bic_table(const BreakpointSelection &selection, const std::filesystem::path &path);

} // namespace mortscen
