#include "mortscen/age.hpp"

#include "mortscen/errors.hpp"

namespace mortscen {

namespace {

const std::array<std::string, AgeGroup::count> kLabels = {
    "<1",    "1-4",   "5-9",   "10-14", "15-19", "20-24", "25-29",
    "30-34", "35-39", "40-44", "45-49", "50-54", "55-59", "60-64",
    "65-69", "70-74", "75-79", "80-84", "85+"};

const std::array<int, AgeGroup::count> kLowerAges = {
    0, 1, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85};

} // namespace

AgeGroup AgeGroup::of_age(int age) {
    if (age < 0)
        throw InvalidArgument("age must be non-negative, got " + std::to_string(age));
    if (age < 1)
        return AgeGroup(0);
    if (age >= 85)
        return AgeGroup(count - 1);
    if (age < 5)
        return AgeGroup(1);
    return AgeGroup(2 + (age - 5) / 5);
}

AgeGroup AgeGroup::from_index(int index) {
    if (index < 0 || index >= count)
        throw InvalidArgument("age band index out of range: " + std::to_string(index));
    return AgeGroup(index);
}

AgeGroup AgeGroup::from_label(std::string_view label) {
    for (int i = 0; i < count; ++i)
        if (kLabels[i] == label)
            return AgeGroup(i);
    throw SchemaError("unrecognised age group label: '" + std::string(label) + "'");
}

const std::array<AgeGroup, AgeGroup::count> &AgeGroup::all() {
    static const auto bands = [] {
        std::array<AgeGroup, count> a{};
        for (int i = 0; i < count; ++i)
            a[i] = AgeGroup(i);
        return a;
    }();
    return bands;
}

const std::string &AgeGroup::label() const { return kLabels[index_]; }

int AgeGroup::lower_age() const { return kLowerAges[index_]; }

std::optional<int> AgeGroup::width() const {
    if (is_open())
        return std::nullopt;
    if (index_ == 0)
        return 1;
    if (index_ == 1)
        return 4;
    return 5;
}

} // namespace mortscen
