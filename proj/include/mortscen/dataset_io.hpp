#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mortscen/dataset.hpp"

namespace mortscen {

/// How to interpret the cause column of a deaths file.
enum class CauseColumn {
    auto_detect, ///< decided by the header: "cause" = group codes, "icd10" = raw codes
    group,       ///< three-letter group codes (CAN, CIR, ...)
    icd10,       ///< individual ICD-10 codes, mapped through parse_cause_code
};

struct LoadOptions {
    YearRange years{2001, 2018};
    CauseColumn cause_column = CauseColumn::auto_detect;
};

struct LoadStats {
    int merged_rows = 0;     ///< duplicate (age, cause, year) rows folded by summation
    int skipped_rows = 0;    ///< rows belonging to the other sex
};

/// Load one sex from a deaths file (sex,year,age_group,{cause|icd10},deaths)
/// and an exposures file (sex,year,age_group,population). Missing death
/// cells default to zero; every exposure cell must be present.
MortalityDataset load_dataset(const std::filesystem::path &deaths_path,
                              const std::filesystem::path &exposures_path, Sex sex,
                              const LoadOptions &options = {}, LoadStats *stats = nullptr);

/// Write a dataset back out in the same layout (group cause codes).
/// Exposures use exact round-trip formatting, so load_dataset(save_dataset(ds))
/// reproduces ds bit for bit.
void save_dataset(const MortalityDataset &ds, const std::filesystem::path &deaths_path,
                  const std::filesystem::path &exposures_path);

/// Load standard population weights (age_group,weight); all 19 bands required.
StandardPopulation load_standard_population(const std::filesystem::path &path);

struct ValidationIssue {
    std::string file;
    int line = 0;    ///< 0 when the issue is not tied to a specific line
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> errors;
    std::vector<ValidationIssue> warnings;

    bool ok() const { return errors.empty(); }
};

/// Run the same checks as load_dataset but collect every issue instead of
/// throwing at the first one.
ValidationReport validate_dataset(const std::filesystem::path &deaths_path,
                                  const std::filesystem::path &exposures_path, Sex sex,
                                  const LoadOptions &options = {});

} // namespace mortscen
