#include "mortscen/cause.hpp"

#include <cctype>

#include "mortscen/errors.hpp"

namespace mortscen {

namespace {

struct GroupInfo {
    std::string abbreviation;
    std::string name;
    std::vector<std::pair<std::string, std::string>> ranges;
};

const std::array<GroupInfo, CauseGroup::count> kGroups = {{
    {"CAN", "Cancers", {{"C00", "D49"}}},
    {"CIR", "Circulatory diseases", {{"I00", "I99"}}},
    {"DIG", "Digestive diseases", {{"K00", "K95"}}},
    {"END", "Endocrine diseases", {{"D50", "D89"}, {"E00", "E89"}}},
    {"EXT", "External causes", {{"V00", "Y99"}}},
    {"GEN", "Genitourinary diseases", {{"N00", "N99"}}},
    {"INF", "Infectious diseases", {{"A00", "B99"}}},
    {"MEN", "Mental and behavioural disorders", {{"F01", "F99"}}},
    {"MUS", "Musculoskeletal and skin diseases", {{"M00", "M99"}, {"L00", "L99"}}},
    {"NER", "Nervous system diseases", {{"G00", "G99"}, {"H00", "H59"}, {"H60", "H95"}}},
    {"RES", "Respiratory diseases", {{"J00", "J99"}}},
    {"OTH",
     "Other causes",
     {{"O00", "O9A"}, {"P00", "P96"}, {"Q00", "Q99"}, {"R00", "R99"}, {"S00", "T88"}, {"Z00", "Z99"}}},
}};

} // namespace

CauseGroup CauseGroup::from_index(int index) {
    if (index < 0 || index >= count)
        throw InvalidArgument("cause group index out of range: " + std::to_string(index));
    return CauseGroup(static_cast<CauseCode>(index));
}

CauseGroup CauseGroup::from_code(std::string_view code) {
    for (int i = 0; i < count; ++i)
        if (kGroups[i].abbreviation == code)
            return CauseGroup(static_cast<CauseCode>(i));
    throw SchemaError("unrecognised cause group code: '" + std::string(code) + "'");
}

const std::array<CauseGroup, CauseGroup::count> &CauseGroup::all() {
    static const auto groups = [] {
        std::array<CauseGroup, count> a{};
        for (int i = 0; i < count; ++i)
            a[i] = CauseGroup(static_cast<CauseCode>(i));
        return a;
    }();
    return groups;
}

const std::string &CauseGroup::abbreviation() const { return kGroups[index()].abbreviation; }

const std::string &CauseGroup::name() const { return kGroups[index()].name; }

const std::vector<std::pair<std::string, std::string>> &CauseGroup::icd10_ranges() const {
    return kGroups[index()].ranges;
}

CauseGroup parse_cause_code(std::string_view icd10) {
    auto malformed = [&] {
        return MalformedCode("malformed ICD-10 code: '" + std::string(icd10) + "'");
    };

    if (icd10.size() < 3)
        throw malformed();

    // Category: a letter, a digit, then a digit or letter (ranges such as
    // O00-O9A have an alphabetic third character).
    char chapter = static_cast<char>(std::toupper(static_cast<unsigned char>(icd10[0])));
    char second = icd10[1];
    char third = static_cast<char>(std::toupper(static_cast<unsigned char>(icd10[2])));
    if (!std::isalpha(static_cast<unsigned char>(chapter)) ||
        !std::isdigit(static_cast<unsigned char>(second)) ||
        !std::isalnum(static_cast<unsigned char>(third)))
        throw malformed();

    // Optional subcategory: ".1", "45", ".044G", ... — alphanumeric, with at
    // most one leading dot.
    std::string_view rest = icd10.substr(3);
    if (!rest.empty()) {
        if (rest.front() == '.')
            rest.remove_prefix(1);
        if (rest.empty())
            throw malformed();
        for (char ch : rest)
            if (!std::isalnum(static_cast<unsigned char>(ch)))
                throw malformed();
    }

    const std::string category{chapter, second, third};
    for (const auto &group : CauseGroup::all())
        for (const auto &[lo, hi] : group.icd10_ranges())
            if (category >= lo && category <= hi)
                return group;

    throw UnknownCode("ICD-10 code outside every cause group: '" + std::string(icd10) + "'");
}

} // namespace mortscen
