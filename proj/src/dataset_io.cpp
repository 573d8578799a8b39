#include "mortscen/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <tuple>

#include "mortscen/csv.hpp"
#include "mortscen/errors.hpp"

namespace mortscen {

namespace {

constexpr const char *kDeathsHeaderGroup = "sex,year,age_group,cause,deaths";
constexpr const char *kDeathsHeaderIcd = "sex,year,age_group,icd10,deaths";
constexpr const char *kExposuresHeader = "sex,year,age_group,population";
constexpr const char *kStdPopHeader = "age_group,weight";

std::string location(const std::filesystem::path &path, int line) {
    return path.string() + ":" + std::to_string(line);
}

/// Reads the first non-empty line of a deaths file to pick the cause-column
/// interpretation when the caller asked for auto detection.
bool deaths_file_uses_icd(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw SchemaError("cannot open file: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        auto fields = csv::split_fields(line);
        bool empty = true;
        for (const auto &f : fields)
            if (!f.empty())
                empty = false;
        if (empty)
            continue;
        if (fields == csv::split_fields(kDeathsHeaderGroup))
            return false;
        if (fields == csv::split_fields(kDeathsHeaderIcd))
            return true;
        throw SchemaError(path.string() + ": expected header '" + kDeathsHeaderGroup + "' or '" +
                          kDeathsHeaderIcd + "'");
    }
    throw SchemaError(path.string() + ": file is empty");
}

struct IssueSink {
    // Throwing sink (load mode) leaves `collect` null.
    std::vector<ValidationIssue> *collect = nullptr;

    template <typename ErrorT>
    void fail(const std::filesystem::path &file, int line, const std::string &message) {
        if (collect) {
            collect->push_back(ValidationIssue{file.string(), line, message});
            return;
        }
        throw ErrorT(location(file, line) + ": " + message);
    }
};

void scan_deaths(const std::filesystem::path &path, Sex sex, const LoadOptions &options,
                 bool icd_codes, MortalityDataset &ds, LoadStats &stats, IssueSink &sink) {
    const std::string header = icd_codes ? kDeathsHeaderIcd : kDeathsHeaderGroup;
    auto rows = csv::read_table(path, header);
    std::map<std::tuple<int, int, int>, int> seen; // (age, cause, year) -> first line
    for (const auto &row : rows) {
        Sex row_sex;
        try {
            row_sex = sex_from_string(row.fields[0]);
        } catch (const SchemaError &e) {
            sink.fail<SchemaError>(path, row.line, e.what());
            continue;
        }
        if (row_sex != sex) {
            ++stats.skipped_rows;
            continue;
        }
        try {
            const int year = csv::parse_year(row.fields[1], "year");
            if (!options.years.contains(year)) {
                sink.fail<RangeError>(path, row.line,
                                      "year " + std::to_string(year) + " outside study span " +
                                          std::to_string(options.years.first) + "-" +
                                          std::to_string(options.years.last));
                continue;
            }
            const AgeGroup age = AgeGroup::from_label(row.fields[2]);
            const CauseGroup cause = icd_codes ? parse_cause_code(row.fields[3])
                                               : CauseGroup::from_code(row.fields[3]);
            const std::int64_t count = csv::parse_int(row.fields[4], "deaths");
            if (count < 0) {
                sink.fail<SchemaError>(path, row.line, "negative death count");
                continue;
            }
            auto key = std::make_tuple(age.index(), cause.index(), year);
            auto [it, inserted] = seen.emplace(key, row.line);
            if (!inserted)
                ++stats.merged_rows;
            ds.add_deaths(age, cause, year, count);
        } catch (const RangeError &e) {
            sink.fail<RangeError>(path, row.line, e.what());
        } catch (const MalformedCode &e) {
            sink.fail<MalformedCode>(path, row.line, e.what());
        } catch (const UnknownCode &e) {
            sink.fail<UnknownCode>(path, row.line, e.what());
        } catch (const SchemaError &e) {
            sink.fail<SchemaError>(path, row.line, e.what());
        }
    }
}

void scan_exposures(const std::filesystem::path &path, Sex sex, const LoadOptions &options,
                    MortalityDataset &ds, LoadStats &stats, IssueSink &sink) {
    auto rows = csv::read_table(path, kExposuresHeader);
    std::map<std::pair<int, int>, int> seen; // (age, year) -> first line
    for (const auto &row : rows) {
        Sex row_sex;
        try {
            row_sex = sex_from_string(row.fields[0]);
        } catch (const SchemaError &e) {
            sink.fail<SchemaError>(path, row.line, e.what());
            continue;
        }
        if (row_sex != sex) {
            ++stats.skipped_rows;
            continue;
        }
        try {
            const int year = csv::parse_year(row.fields[1], "year");
            if (!options.years.contains(year)) {
                sink.fail<RangeError>(path, row.line,
                                      "year " + std::to_string(year) + " outside study span " +
                                          std::to_string(options.years.first) + "-" +
                                          std::to_string(options.years.last));
                continue;
            }
            const AgeGroup age = AgeGroup::from_label(row.fields[2]);
            const double population = csv::parse_double(row.fields[3], "population");
            auto key = std::make_pair(age.index(), year);
            auto [it, inserted] = seen.emplace(key, row.line);
            if (!inserted) {
                sink.fail<SchemaError>(path, row.line,
                                       "duplicate exposure for age " + age.label() + ", year " +
                                           std::to_string(year) + " (first at line " +
                                           std::to_string(it->second) + ")");
                continue;
            }
            ds.set_exposure(age, year, population);
        } catch (const RangeError &e) {
            sink.fail<RangeError>(path, row.line, e.what());
        } catch (const SchemaError &e) {
            sink.fail<SchemaError>(path, row.line, e.what());
        }
    }
}

} // namespace

MortalityDataset load_dataset(const std::filesystem::path &deaths_path,
                              const std::filesystem::path &exposures_path, Sex sex,
                              const LoadOptions &options, LoadStats *stats) {
    bool icd_codes;
    switch (options.cause_column) {
    case CauseColumn::group:
        icd_codes = false;
        break;
    case CauseColumn::icd10:
        icd_codes = true;
        break;
    default:
        icd_codes = deaths_file_uses_icd(deaths_path);
        break;
    }

    MortalityDataset ds(sex, options.years);
    LoadStats local;
    IssueSink sink; // throwing mode
    scan_deaths(deaths_path, sex, options, icd_codes, ds, local, sink);
    scan_exposures(exposures_path, sex, options, ds, local, sink);
    ds.require_complete();
    if (stats)
        *stats = local;
    return ds;
}

void save_dataset(const MortalityDataset &ds, const std::filesystem::path &deaths_path,
                  const std::filesystem::path &exposures_path) {
    std::ofstream deaths(deaths_path);
    if (!deaths)
        throw SchemaError("cannot write file: " + deaths_path.string());
    deaths << kDeathsHeaderGroup << "\n";
    const std::string sex = to_string(ds.sex());
    for (const auto &age : AgeGroup::all())
        for (const auto &cause : CauseGroup::all())
            for (int year = ds.years().first; year <= ds.years().last; ++year)
                deaths << sex << ',' << year << ',' << age.label() << ',' << cause.abbreviation()
                       << ',' << ds.deaths(age, cause, year) << "\n";

    std::ofstream exposures(exposures_path);
    if (!exposures)
        throw SchemaError("cannot write file: " + exposures_path.string());
    exposures << kExposuresHeader << "\n";
    for (const auto &age : AgeGroup::all())
        for (int year = ds.years().first; year <= ds.years().last; ++year)
            exposures << sex << ',' << year << ',' << age.label() << ','
                      << csv::format_exact(ds.exposure(age, year)) << "\n";
}

StandardPopulation load_standard_population(const std::filesystem::path &path) {
    auto rows = csv::read_table(path, kStdPopHeader);
    std::vector<double> weights(AgeGroup::count, std::nan(""));
    for (const auto &row : rows) {
        const AgeGroup age = AgeGroup::from_label(row.fields[0]);
        if (!std::isnan(weights[age.index()]))
            throw SchemaError(location(path, row.line) + ": duplicate weight for age band " +
                              age.label());
        weights[age.index()] = csv::parse_double(row.fields[1], "weight");
    }
    for (const auto &age : AgeGroup::all())
        if (std::isnan(weights[age.index()]))
            throw SchemaError(path.string() + ": missing weight for age band " + age.label());
    return StandardPopulation(std::move(weights));
}

ValidationReport validate_dataset(const std::filesystem::path &deaths_path,
                                  const std::filesystem::path &exposures_path, Sex sex,
                                  const LoadOptions &options) {
    ValidationReport report;
    bool icd_codes = false;
    try {
        switch (options.cause_column) {
        case CauseColumn::group:
            icd_codes = false;
            break;
        case CauseColumn::icd10:
            icd_codes = true;
            break;
        default:
            icd_codes = deaths_file_uses_icd(deaths_path);
            break;
        }
    } catch (const Error &e) {
        report.errors.push_back(ValidationIssue{deaths_path.string(), 0, e.what()});
        return report;
    }

    MortalityDataset ds(sex, options.years);
    LoadStats stats;
    IssueSink sink;
    sink.collect = &report.errors;
    try {
        scan_deaths(deaths_path, sex, options, icd_codes, ds, stats, sink);
    } catch (const Error &e) {
        report.errors.push_back(ValidationIssue{deaths_path.string(), 0, e.what()});
    }
    try {
        scan_exposures(exposures_path, sex, options, ds, stats, sink);
        for (const auto &age : AgeGroup::all())
            for (int year = options.years.first; year <= options.years.last; ++year)
                if (!ds.exposures_complete()) {
                    try {
                        ds.exposure(age, year);
                    } catch (const GapError &e) {
                        report.errors.push_back(
                            ValidationIssue{exposures_path.string(), 0, e.what()});
                    }
                }
    } catch (const Error &e) {
        report.errors.push_back(ValidationIssue{exposures_path.string(), 0, e.what()});
    }
    if (stats.merged_rows > 0)
        report.warnings.push_back(ValidationIssue{
            deaths_path.string(), 0,
            std::to_string(stats.merged_rows) + " duplicate death row(s) merged by summation"});
    return report;
}

} // namespace mortscen
