#include "mortscen/fit_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include <json.hpp>

#include "mortscen/errors.hpp"

namespace mortscen {

namespace {

using nlohmann::json;

json number_or_null(double value) {
    if (std::isnan(value))
        return nullptr;
    return value;
}

double number_from(const json &j, const std::string &context) {
    if (j.is_null())
        return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number())
        throw SchemaError(context + ": expected a number");
    return j.get<double>();
}

} // namespace

void write_fits(const FitSurface &surface, const std::filesystem::path &path) {
    json doc;
    doc["sex"] = to_string(surface.sex());
    doc["years"] = {{"first", surface.years().first}, {"last", surface.years().last}};
    doc["breakpoint"] = surface.breakpoint();
    json cells = json::array();
    for (const auto &age : AgeGroup::all())
        for (const auto &cause : CauseGroup::all()) {
            const CellFit &cell = surface.fit(age, cause);
            json record;
            record["age_group"] = age.label();
            record["cause"] = cause.abbreviation();
            record["zeroed"] = cell.zeroed;
            record["converged"] = cell.converged;
            if (!cell.zeroed) {
                record["theta_capped"] = cell.theta_capped;
                record["iterations"] = cell.iterations;
                record["beta"] = json::array();
                record["se"] = json::array();
                record["p_values"] = json::array();
                for (int j = 0; j < 4; ++j) {
                    record["beta"].push_back(number_or_null((*cell.beta)[j]));
                    record["se"].push_back(number_or_null(cell.se[j]));
                    record["p_values"].push_back(number_or_null(cell.p_values[j]));
                }
                record["theta"] = *cell.theta;
                record["cov"] = json::array();
                for (int r = 0; r < 4; ++r) {
                    json row = json::array();
                    for (int c = 0; c < 4; ++c)
                        row.push_back(number_or_null(cell.cov[r][c]));
                    record["cov"].push_back(row);
                }
                record["loglik"] = number_or_null(cell.loglik);
                record["score_norm"] = number_or_null(cell.score_norm);
            }
            cells.push_back(std::move(record));
        }
    doc["cells"] = std::move(cells);

    std::ofstream out(path);
    if (!out)
        throw SchemaError("cannot write file: " + path.string());
    out << doc.dump(2) << "\n";
}

FitSurface read_fits(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw SchemaError("cannot open file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error &e) {
        throw SchemaError(path.string() + ": " + e.what());
    }

    try {
        const Sex sex = sex_from_string(doc.at("sex").get<std::string>());
        const YearRange years{doc.at("years").at("first").get<int>(),
                              doc.at("years").at("last").get<int>()};
        const int breakpoint = doc.at("breakpoint").get<int>();
        FitSurface surface(sex, years, breakpoint);

        std::vector<bool> seen(static_cast<std::size_t>(AgeGroup::count) * CauseGroup::count,
                               false);
        for (const auto &record : doc.at("cells")) {
            const AgeGroup age = AgeGroup::from_label(record.at("age_group").get<std::string>());
            const CauseGroup cause =
                CauseGroup::from_code(record.at("cause").get<std::string>());
            const std::string context =
                path.string() + ": cell " + age.label() + "/" + cause.abbreviation();
            const std::size_t index =
                static_cast<std::size_t>(age.index()) * CauseGroup::count + cause.index();
            if (seen[index])
                throw SchemaError(context + ": duplicated");
            seen[index] = true;

            CellFit cell;
            cell.breakpoint = breakpoint;
            cell.zeroed = record.at("zeroed").get<bool>();
            cell.converged = record.at("converged").get<bool>();
            if (!cell.zeroed) {
                if (!record.contains("beta") || !record.contains("theta"))
                    throw SchemaError(context + ": incomplete coefficients");
                const auto &beta = record.at("beta");
                if (!beta.is_array() || beta.size() != 4)
                    throw SchemaError(context + ": beta must have four entries");
                std::array<double, 4> b{};
                for (int j = 0; j < 4; ++j) {
                    b[j] = number_from(beta.at(j), context);
                    if (std::isnan(b[j]))
                        throw SchemaError(context + ": incomplete coefficients");
                }
                cell.beta = b;
                cell.theta = number_from(record.at("theta"), context);
                if (std::isnan(*cell.theta))
                    throw SchemaError(context + ": incomplete coefficients");
                cell.theta_capped = record.value("theta_capped", false);
                cell.iterations = record.value("iterations", 0);
                if (record.contains("se"))
                    for (int j = 0; j < 4; ++j)
                        cell.se[j] = number_from(record.at("se").at(j), context);
                if (record.contains("p_values"))
                    for (int j = 0; j < 4; ++j)
                        cell.p_values[j] = number_from(record.at("p_values").at(j), context);
                if (record.contains("cov"))
                    for (int r = 0; r < 4; ++r)
                        for (int c = 0; c < 4; ++c)
                            cell.cov[r][c] = number_from(record.at("cov").at(r).at(c), context);
                if (record.contains("loglik"))
                    cell.loglik = number_from(record.at("loglik"), context);
                if (record.contains("score_norm"))
                    cell.score_norm = number_from(record.at("score_norm"), context);
            }
            surface.fit(age, cause) = cell;
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i])
                throw SchemaError(path.string() + ": missing cell " +
                                  AgeGroup::from_index(static_cast<int>(i) / CauseGroup::count)
                                      .label() +
                                  "/" +
                                  CauseGroup::from_index(static_cast<int>(i) % CauseGroup::count)
                                      .abbreviation());
        return surface;
    } catch (const json::exception &e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

} // namespace mortscen
