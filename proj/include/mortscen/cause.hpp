#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mortscen {

/// The 12 broad cause-of-death groups.
enum class CauseCode {
    CAN, ///< cancers / neoplasms
    CIR, ///< circulatory system
    DIG, ///< digestive system
    END, ///< endocrine, blood, metabolic
    EXT, ///< external causes
    GEN, ///< genitourinary system
    INF, ///< infectious and parasitic
    MEN, ///< mental and behavioural
    MUS, ///< musculoskeletal and skin
    NER, ///< nervous system and sense organs
    RES, ///< respiratory system
    OTH, ///< all remaining chapters
};

class CauseGroup {
  public:
    static constexpr int count = 12;

    CauseGroup() = default;
    CauseGroup(CauseCode code) : code_(code) {}

    static CauseGroup from_index(int index);

    /// Group from its three-letter code, e.g. "CIR". Throws SchemaError on
    /// an unrecognised code.
    static CauseGroup from_code(std::string_view code);

    static const std::array<CauseGroup, count> &all();

    CauseCode code() const noexcept { return code_; }
    int index() const noexcept { return static_cast<int>(code_); }
    const std::string &abbreviation() const;
    const std::string &name() const;

    /// Closed ICD-10 ranges covered by the group, as pairs of three-character
    /// category endpoints, e.g. {"I00", "I99"}.
    const std::vector<std::pair<std::string, std::string>> &icd10_ranges() const;

    friend bool operator==(CauseGroup a, CauseGroup b) { return a.code_ == b.code_; }
    friend bool operator!=(CauseGroup a, CauseGroup b) { return a.code_ != b.code_; }
    friend bool operator<(CauseGroup a, CauseGroup b) { return a.index() < b.index(); }

  private:
    CauseCode code_ = CauseCode::CAN;
};

/// Map an individual ICD-10 code (e.g. "I25.1", "C349") to its cause group.
///
/// Accepts an upper- or lower-case letter followed by two alphanumeric
/// characters (the second must be a digit) and an optional subcategory
/// suffix, with or without a separating dot. Throws MalformedCode when the
/// string cannot be parsed and UnknownCode when the category falls outside
/// every group (e.g. the U chapter).
CauseGroup parse_cause_code(std::string_view icd10);

} // namespace mortscen
