#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace mortscen {

/// One of the 19 abridged age bands used throughout:
/// <1, 1-4, 5-9, 10-14, ..., 80-84, 85+.
class AgeGroup {
  public:
    static constexpr int count = 19;

    AgeGroup() = default;

    /// Band holding exact age `age` (in whole years).
    static AgeGroup of_age(int age);

    /// Band from its positional index, 0 = "<1" ... 18 = "85+".
    static AgeGroup from_index(int index);

    /// Band from its label, e.g. "<1", "10-14", "85+". Throws SchemaError
    /// on an unrecognised label.
    static AgeGroup from_label(std::string_view label);

    static const std::array<AgeGroup, count> &all();

    int index() const noexcept { return index_; }

    const std::string &label() const;

    /// First exact age covered by the band.
    int lower_age() const;

    /// Band width in whole years; empty for the open-ended 85+ band.
    std::optional<int> width() const;

    bool is_open() const { return index_ == count - 1; }

    friend bool operator==(AgeGroup a, AgeGroup b) { return a.index_ == b.index_; }
    friend bool operator!=(AgeGroup a, AgeGroup b) { return a.index_ != b.index_; }
    friend bool operator<(AgeGroup a, AgeGroup b) { return a.index_ < b.index_; }

  private:
    explicit AgeGroup(int index) : index_(index) {}

    int index_ = 0;
};

} // namespace mortscen
