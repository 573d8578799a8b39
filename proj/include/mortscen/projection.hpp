#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mortscen/lifetable.hpp"
#include "mortscen/scenarios.hpp"

namespace mortscen {

/// External annual trend assumptions (log-rate slopes) per age band and
/// cause, for one sex.
class WhoTrendTable {
  public:
    explicit WhoTrendTable(Sex sex = Sex::male);

    Sex sex() const noexcept { return sex_; }
    void set(AgeGroup age, CauseGroup cause, double beta);

    /// Throws MissingWhoCell when the cell was never supplied.
    double at(AgeGroup age, CauseGroup cause) const;

    bool complete() const;

  private:
    Sex sex_;
    std::array<std::optional<double>, AgeGroup::count * CauseGroup::count> beta_;
};

/// Load one sex from a trend file (sex,age_group,cause,beta_who).
WhoTrendTable load_who_trends(const std::filesystem::path &path, Sex sex);

/// A forward path for mortality rates beyond the fitted window. The added
/// log-linear term b4 (t - 2018) for t >= 2018 bends each cell's trend:
///   FS1  b4 = 0                      (recent trends continue)
///   FS2  b4 = -b2 for one cause      (its pre-break trend resumes)
///   FS3  b4 = -b2 for every cause
///   FS4  b4 = log(1 - z)             (flat annual improvement z)
///   FS5  b4 = beta_who - (b1 + b2)   (external trend assumptions)
struct FutureScenario {
    enum class Kind {
        fs1_constant,
        fs2_cause_reversion,
        fs3_all_reversion,
        fs4_flat_improvement,
        fs5_external,
    };

    Kind kind = Kind::fs1_constant;
    CauseGroup cause;                 ///< FS2 only
    double improvement = 0.0;         ///< FS4 only, fraction per year in [0, 1)
    std::optional<WhoTrendTable> who; ///< FS5 only
    YearRange horizon{2019, 2028};

    static FutureScenario fs1(YearRange horizon = {2019, 2028});
    static FutureScenario fs2(CauseGroup cause, YearRange horizon = {2019, 2028});
    static FutureScenario fs3(YearRange horizon = {2019, 2028});
    static FutureScenario fs4(double improvement, YearRange horizon = {2019, 2028});
    static FutureScenario fs5(WhoTrendTable who, YearRange horizon = {2019, 2028});

    std::string label() const;
};

/// Latest horizon year accepted for a projection.
inline constexpr int kHorizonCap = 2040;

/// The b4 grid implied by a scenario, in (age x cause) cell order; zeroed
/// cells get 0. Throws MissingWhoCell when FS5 assumptions are incomplete
/// and InvalidArgument for an FS4 improvement outside [0, 1).
std::array<double, AgeGroup::count * CauseGroup::count> beta4_grid(const FitSurface &surface,
                                                                   const FutureScenario &fs);

/// Projected cell rate at year t >= 2018 (equal to the fitted rate at 2018).
double projected_rate(const FitSurface &surface,
                      const std::array<double, AgeGroup::count * CauseGroup::count> &beta4,
                      AgeGroup age, CauseGroup cause, int year);

/// Period life expectancy at age h for every horizon year of the scenario.
std::vector<LifeTableResult> project_le_path(const FitSurface &surface,
                                             const FutureScenario &fs, int h);

} // namespace mortscen
