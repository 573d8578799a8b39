#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mortscen/errors.hpp"
#include "mortscen/fit_io.hpp"
#include "support/synthetic.hpp"

using namespace mortscen;
namespace fs = std::filesystem;

namespace {

FitSurface sample_surface() {
    std::array<synthetic::CellTrend, CauseGroup::count> trends;
    for (int c = 0; c < CauseGroup::count; ++c) {
        synthetic::CellTrend t;
        t.b1 = -0.019;
        t.b0 = -5.3 - 0.06 * c - t.b1 * 2001.0;
        t.b2 = (c % 3 == 0) ? 0.017 : 0.0;
        trends[c] = t;
    }
    auto ds = synthetic::exact_dataset(trends, 3e5);
    // Empty one cell so the grid carries zeroed entries too.
    for (int year = 2001; year <= 2018; ++year)
        ds.set_deaths(AgeGroup::from_index(2), CauseGroup::from_code("MUS"), year, 0);
    return fit_surface(ds, 2011, 4);
}

} // namespace

TEST_CASE("fit grids survive a write/read round trip bit for bit") {
    const auto dir = fs::temp_directory_path() / "mortscen_fit_io";
    fs::create_directories(dir);
    const auto path = dir / "fits.json";

    const auto surface = sample_surface();
    write_fits(surface, path);
    const auto again = read_fits(path);

    CHECK(again.sex() == surface.sex());
    CHECK(again.years().first == surface.years().first);
    CHECK(again.years().last == surface.years().last);
    CHECK(again.breakpoint() == surface.breakpoint());

    for (const auto &age : AgeGroup::all())
        for (const auto &cause : CauseGroup::all()) {
            const auto &a = surface.fit(age, cause);
            const auto &b = again.fit(age, cause);
            CHECK(a.zeroed == b.zeroed);
            CHECK(a.converged == b.converged);
            CHECK(a.theta_capped == b.theta_capped);
            CHECK(a.iterations == b.iterations);
            CHECK(a.breakpoint == b.breakpoint);
            REQUIRE(a.beta.has_value() == b.beta.has_value());
            if (a.beta) {
                for (int i = 0; i < 4; ++i) {
                    CHECK((*a.beta)[i] == (*b.beta)[i]);
                    CHECK(a.se[i] == b.se[i]);
                    CHECK(a.p_values[i] == b.p_values[i]);
                    for (int j = 0; j < 4; ++j)
                        CHECK(a.cov[i][j] == b.cov[i][j]);
                }
                CHECK(*a.theta == *b.theta);
                CHECK(a.loglik == b.loglik);
                CHECK(a.score_norm == b.score_norm);
            }
        }
    fs::remove_all(dir);
}

TEST_CASE("incomplete or damaged fit files are rejected") {
    const auto dir = fs::temp_directory_path() / "mortscen_fit_io_bad";
    fs::create_directories(dir);
    const auto path = dir / "fits.json";
    const auto surface = sample_surface();
    write_fits(surface, path);

    auto slurp = [&] {
        std::ifstream in(path);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };

    SUBCASE("not json at all") {
        std::ofstream(dir / "bad.json") << "definitely: not json {";
        CHECK_THROWS_AS(read_fits(dir / "bad.json"), SchemaError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_fits(dir / "absent.json"), SchemaError);
    }
    SUBCASE("a cell deleted") {
        auto doc = nlohmann::json::parse(slurp());
        doc["cells"].erase(doc["cells"].size() - 1);
        std::ofstream(dir / "short.json") << doc.dump(2);
        CHECK_THROWS_AS(read_fits(dir / "short.json"), SchemaError);
    }
    SUBCASE("coefficients nulled on a fitted cell") {
        auto doc = nlohmann::json::parse(slurp());
        for (auto &cell : doc["cells"])
            if (!cell["zeroed"].get<bool>()) {
                cell["beta"] = nullptr;
                break;
            }
        std::ofstream(dir / "nulled.json") << doc.dump(2);
        CHECK_THROWS_AS(read_fits(dir / "nulled.json"), SchemaError);
    }
    SUBCASE("a duplicated cell") {
        auto doc = nlohmann::json::parse(slurp());
        doc["cells"][1] = doc["cells"][0];
        std::ofstream(dir / "dup.json") << doc.dump(2);
        CHECK_THROWS_AS(read_fits(dir / "dup.json"), SchemaError);
    }
    fs::remove_all(dir);
}
