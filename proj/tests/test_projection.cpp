#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mortscen/errors.hpp"
#include "mortscen/projection.hpp"
#include "support/synthetic.hpp"

using namespace mortscen;
namespace fs = std::filesystem;

namespace {

std::array<synthetic::CellTrend, CauseGroup::count> base_trends() {
    std::array<synthetic::CellTrend, CauseGroup::count> trends;
    for (int c = 0; c < CauseGroup::count; ++c) {
        synthetic::CellTrend t;
        t.b1 = -0.02;
        t.b0 = -5.0 - 0.07 * c - t.b1 * 2001.0;
        t.b2 = (c == 1) ? 0.022 : 0.0;
        trends[c] = t;
    }
    return trends;
}

FitSurface projected_surface() {
    static const FitSurface surface =
        fit_surface(synthetic::exact_dataset(base_trends(), 1e7), 2011, 4);
    return surface;
}

std::size_t cell_index(AgeGroup age, CauseGroup cause) {
    return static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index();
}

} // namespace

TEST_CASE("scenario labels spell out their parameters") {
    CHECK(FutureScenario::fs1().label() == "fs1");
    CHECK(FutureScenario::fs2(CauseGroup::from_code("CIR")).label() == "fs2:CIR");
    CHECK(FutureScenario::fs3().label() == "fs3");
    CHECK(FutureScenario::fs4(0.02).label() == "fs4:0.02");
    CHECK(FutureScenario::fs5(WhoTrendTable(Sex::male)).label() == "fs5");
}

TEST_CASE("forward bends implement each scenario's rule") {
    const auto surface = projected_surface();
    const auto age = AgeGroup::from_index(7);
    const auto slowed = CauseGroup::from_code("CIR"); // index 1: the slowed cause
    const auto other = CauseGroup::from_code("CAN");

    const auto g1 = beta4_grid(surface, FutureScenario::fs1());
    for (double b4 : g1)
        CHECK(b4 == 0.0);

    const auto g2 = beta4_grid(surface, FutureScenario::fs2(slowed));
    const auto &cell = surface.fit(age, slowed);
    REQUIRE(cell.beta.has_value());
    CHECK(g2[cell_index(age, slowed)] == -(*cell.beta)[2]);
    CHECK(g2[cell_index(age, other)] == 0.0);

    const auto g3 = beta4_grid(surface, FutureScenario::fs3());
    for (const auto &a : AgeGroup::all())
        for (const auto &c : CauseGroup::all()) {
            const auto &f = surface.fit(a, c);
            if (f.beta)
                CHECK(g3[cell_index(a, c)] == -(*f.beta)[2]);
            else
                CHECK(g3[cell_index(a, c)] == 0.0);
        }

    const auto g4 = beta4_grid(surface, FutureScenario::fs4(0.025));
    for (const auto &a : AgeGroup::all())
        for (const auto &c : CauseGroup::all())
            if (surface.fit(a, c).beta)
                CHECK(g4[cell_index(a, c)] == doctest::Approx(std::log(0.975)).epsilon(1e-14));
    CHECK_THROWS_AS(beta4_grid(surface, FutureScenario::fs4(1.0)), InvalidArgument);
    CHECK_THROWS_AS(beta4_grid(surface, FutureScenario::fs4(-0.01)), InvalidArgument);

    WhoTrendTable who(surface.sex());
    for (const auto &a : AgeGroup::all())
        for (const auto &c : CauseGroup::all())
            who.set(a, c, -0.03);
    const auto g5 = beta4_grid(surface, FutureScenario::fs5(who));
    const auto &f = surface.fit(age, slowed);
    CHECK(g5[cell_index(age, slowed)] ==
          doctest::Approx(-0.03 - ((*f.beta)[1] + (*f.beta)[2])).epsilon(1e-14));
}

TEST_CASE("incomplete external assumptions are rejected") {
    const auto surface = projected_surface();
    WhoTrendTable who(surface.sex());
    who.set(AgeGroup::from_index(0), CauseGroup::from_code("CAN"), -0.02);
    CHECK_FALSE(who.complete());
    CHECK_THROWS_AS(beta4_grid(surface, FutureScenario::fs5(who)), MissingWhoCell);
    CHECK_THROWS_AS(who.at(AgeGroup::from_index(1), CauseGroup::from_code("CAN")),
                    MissingWhoCell);
}

TEST_CASE("projection is continuous with the fitted window at its last year") {
    const auto surface = projected_surface();
    for (const auto fs :
         {FutureScenario::fs1(), FutureScenario::fs2(CauseGroup::from_code("CIR")),
          FutureScenario::fs3(), FutureScenario::fs4(0.015)}) {
        const auto grid = beta4_grid(surface, fs);
        for (const auto &age : AgeGroup::all())
            for (const auto &cause : CauseGroup::all()) {
                const double at2018 = projected_rate(surface, grid, age, cause, 2018);
                const double fitted = fitted_rate(surface, age, cause, 2018);
                if (fitted > 0.0)
                    CHECK(std::fabs(at2018 - fitted) / fitted < 1e-12);
                else
                    CHECK(at2018 == 0.0);
            }
    }
}

TEST_CASE("projected rates bend log-linearly beyond the window") {
    const auto surface = projected_surface();
    const auto fs = FutureScenario::fs4(0.02);
    const auto grid = beta4_grid(surface, fs);
    const auto age = AgeGroup::from_index(12);
    const auto cause = CauseGroup::from_code("RES");

    const double m2018 = projected_rate(surface, grid, age, cause, 2018);
    for (int year = 2019; year <= 2028; ++year) {
        // Each projected year multiplies the continued trend by (1 - z).
        const auto &beta = *surface.fit(age, cause).beta;
        const double trend =
            std::exp(beta[1] + beta[2]); // post-break annual log change
        const double expect = m2018 * std::pow(trend * 0.98, year - 2018);
        CHECK(projected_rate(surface, grid, age, cause, year) ==
              doctest::Approx(expect).epsilon(1e-10));
    }
    CHECK_THROWS_AS(projected_rate(surface, grid, age, cause, 2017), InvalidArgument);
}

TEST_CASE("life-expectancy paths rank scenarios sensibly") {
    const auto surface = projected_surface();
    const auto p1 = project_le_path(surface, FutureScenario::fs1(), 0);
    const auto p3 = project_le_path(surface, FutureScenario::fs3(), 0);
    const auto p4_zero = project_le_path(surface, FutureScenario::fs4(0.0), 0);
    const auto p4_small = project_le_path(surface, FutureScenario::fs4(0.01), 0);
    const auto p4_large = project_le_path(surface, FutureScenario::fs4(0.03), 0);

    REQUIRE(p1.size() == 10);
    REQUIRE(p3.size() == 10);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        // Undoing every slowdown cannot do worse than continuing it.
        CHECK(p3[i].e_complete >= p1[i].e_complete);
        // Zero extra improvement reduces exactly to continued trends.
        CHECK(p4_zero[i].e_complete == p1[i].e_complete);
        // More extra improvement dominates pointwise.
        CHECK(p4_small[i].e_complete > p4_zero[i].e_complete);
        CHECK(p4_large[i].e_complete > p4_small[i].e_complete);
    }
    // FS1 continues a net decline, so expectancy keeps rising.
    CHECK(p1.back().e_complete > p1.front().e_complete);

    // The reversion scenario for the slowed cause approaches the all-cause
    // reversion (only one cause slowed in this surface).
    const auto p2 = project_le_path(
        surface, FutureScenario::fs2(CauseGroup::from_code("CIR")), 0);
    for (std::size_t i = 0; i < p2.size(); ++i)
        CHECK(p2[i].e_complete == doctest::Approx(p3[i].e_complete).epsilon(1e-4));
}

TEST_CASE("projection horizons are validated") {
    const auto surface = projected_surface();
    CHECK_THROWS_AS(project_le_path(surface, FutureScenario::fs1({2018, 2028}), 0),
                    InvalidArgument);
    CHECK_THROWS_AS(project_le_path(surface, FutureScenario::fs1({2019, 2041}), 0),
                    InvalidArgument);
    CHECK_NOTHROW(project_le_path(surface, FutureScenario::fs1({2019, 2040}), 65));
}

TEST_CASE("external trend files load per sex and validate their cells") {
    const auto dir = fs::temp_directory_path() / "mortscen_who_test";
    fs::create_directories(dir);

    std::ostringstream body;
    body << "sex,age_group,cause,beta_who\n";
    for (const auto &age : AgeGroup::all())
        for (const auto &cause : CauseGroup::all()) {
            body << "male," << age.label() << ',' << cause.abbreviation() << ",-0.025\n";
            body << "female," << age.label() << ',' << cause.abbreviation() << ",-0.031\n";
        }
    {
        std::ofstream out(dir / "who.csv");
        out << body.str();
    }

    const auto male = load_who_trends(dir / "who.csv", Sex::male);
    const auto female = load_who_trends(dir / "who.csv", Sex::female);
    CHECK(male.complete());
    CHECK(female.complete());
    CHECK(male.at(AgeGroup::from_index(4), CauseGroup::from_code("DIG")) == -0.025);
    CHECK(female.at(AgeGroup::from_index(4), CauseGroup::from_code("DIG")) == -0.031);

    // A file missing one sex still loads the other, but stays incomplete.
    {
        std::ofstream out(dir / "partial.csv");
        out << "sex,age_group,cause,beta_who\nmale,<1,CAN,-0.02\n";
    }
    const auto partial = load_who_trends(dir / "partial.csv", Sex::female);
    CHECK_FALSE(partial.complete());
    fs::remove_all(dir);
}
