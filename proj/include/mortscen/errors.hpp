#pragma once

#include <stdexcept>
#include <string>

namespace mortscen {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &what) : std::runtime_error(what) {}
};

/// Input data violates the expected file layout (bad header, bad field,
/// fractional death count, incomplete record, ...).
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// A required exposure cell is missing from the input.
class GapError : public Error {
  public:
    using Error::Error;
};

/// A year falls outside the configured study span.
class RangeError : public Error {
  public:
    using Error::Error;
};

/// An ICD-10 code is syntactically valid but not covered by any cause group.
class UnknownCode : public Error {
  public:
    using Error::Error;
};

/// A cause code string that cannot be parsed at all.
class MalformedCode : public Error {
  public:
    using Error::Error;
};

/// The regression design matrix is rank deficient.
class RankDeficient : public Error {
  public:
    using Error::Error;
};

/// A rate series contains a zero (its logarithm is undefined).
class DegenerateSeries : public Error {
  public:
    using Error::Error;
};

/// A contribution ratio has a zero denominator.
class DegenerateDenominator : public Error {
  public:
    using Error::Error;
};

/// A life-table band rate is zero or negative; the survivorship tail
/// does not converge.
class NonPositiveRate : public Error {
  public:
    using Error::Error;
};

/// An external trend table lacks an (age group, cause) cell.
class MissingWhoCell : public Error {
  public:
    using Error::Error;
};

/// A bootstrap statistic could not be evaluated on a replicate.
class StatisticFailure : public Error {
  public:
    StatisticFailure(const std::string &what, int iteration)
        : Error(what), iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

  private:
    int iteration_;
};

/// A function argument violates its documented precondition.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

} // namespace mortscen
