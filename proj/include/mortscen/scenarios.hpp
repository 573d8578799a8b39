#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mortscen/dataset.hpp"
#include "mortscen/regression.hpp"

namespace mortscen {

/// A counterfactual treatment of the post-break trend change: leave every
/// cell as fitted, restore the pre-break trend (drop b2, keep the level
/// shift b3) for one cause, or restore it for all causes.
struct ScenarioSpec {
    enum class Kind { unadjusted, cause_adjusted, all_adjusted };

    Kind kind = Kind::unadjusted;
    CauseGroup cause; ///< meaningful only for cause_adjusted

    static ScenarioSpec unadjusted() { return {}; }
    static ScenarioSpec revert_cause(CauseGroup cause) {
        return ScenarioSpec{Kind::cause_adjusted, cause};
    }
    static ScenarioSpec revert_all() { return ScenarioSpec{Kind::all_adjusted, {}}; }

    bool adjusts(CauseGroup c) const {
        return kind == Kind::all_adjusted ||
               (kind == Kind::cause_adjusted && c == cause);
    }

    std::string label() const;
    static ScenarioSpec from_label(const std::string &label);
};

/// The complete grid of per-cell fits for one sex.
class FitSurface {
  public:
    FitSurface() = default;
    FitSurface(Sex sex, YearRange years, int breakpoint);

    Sex sex() const noexcept { return sex_; }
    const YearRange &years() const noexcept { return years_; }
    int breakpoint() const noexcept { return breakpoint_; }

    const CellFit &fit(AgeGroup age, CauseGroup cause) const;
    CellFit &fit(AgeGroup age, CauseGroup cause);

  private:
    Sex sex_ = Sex::male;
    YearRange years_{2001, 2018};
    int breakpoint_ = 2011;
    std::vector<CellFit> cells_ = std::vector<CellFit>(AgeGroup::count * CauseGroup::count);
};

/// Fit every (age band, cause) cell of a dataset. Cells are independent, so
/// the map runs on `threads` workers; results do not depend on scheduling.
FitSurface fit_surface(const MortalityDataset &ds, int breakpoint = 2011, int threads = 1);

/// Fitted death rate of one cell at year t (0 for zeroed cells).
double fitted_rate(const FitSurface &surface, AgeGroup age, CauseGroup cause, int year);

/// Cell rate under a scenario: as fitted, or with the post-break slope
/// change removed while the level shift is retained.
double scenario_cell_rate(const CellFit &cell, int year, bool adjusted);

/// All-cause rate for one age band under a scenario: sum of cell rates.
double scenario_rate(const FitSurface &surface, const ScenarioSpec &spec, AgeGroup age, int year);

/// Age-standardised all-cause rate under a scenario.
double scenario_asmr(const FitSurface &surface, const ScenarioSpec &spec,
                     const StandardPopulation &sp, int year);

/// Log scenario ASMR per year of `window`.
std::vector<double> scenario_asmr_series(const FitSurface &surface, const ScenarioSpec &spec,
                                         const StandardPopulation &sp, YearRange window);

/// A straight-line summary of mortality change over a year window.
struct ImprovementSummary {
    double value = 0.0;     ///< see improvement_slope / le_slope for the convention
    double intercept = 0.0; ///< fitted value at the first window year
    YearRange window{2011, 2018};
    std::optional<std::pair<double, double>> ci; ///< filled by bootstrap callers
};

/// Annual improvement implied by a log-rate series: -1 x the least-squares
/// slope over the window (positive = mortality falling).
ImprovementSummary improvement_slope(const std::vector<double> &log_series, YearRange window);

/// Share of the observed-vs-counterfactual gap attributable to one cause:
/// (w_k - w_obs) / (w_all - w_obs). Throws DegenerateDenominator when
/// w_all == w_obs.
double contribution_asmr(double w_obs, double w_k, double w_all);

/// Improvement summaries for every scenario plus the per-cause shares.
struct ContributionTable {
    double baseline = 0.0;                   ///< w under the unadjusted scenario
    double all_adjusted = 0.0;               ///< w with every cause reverted
    std::array<double, CauseGroup::count> adjusted{}; ///< w with one cause reverted
    std::array<double, CauseGroup::count> share{};    ///< contribution ratios
};

ContributionTable asmr_contributions(const FitSurface &surface, const StandardPopulation &sp,
                                     YearRange window = {2011, 2018});

} // namespace mortscen
