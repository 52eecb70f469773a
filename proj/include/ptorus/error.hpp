#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ptorus {

enum class ErrorKind {
    InvalidTau,
    InvalidArgument,
    PoleProximity,
    NoConvergence,
    HalfLatticeInput,
    DegenerateZ,
    DegenerateDenominator,
    BranchJump,
    HalfPeriodCollision,
    StepFailure,
    StepTooLarge,
    UnsupportedIndex,
    NoValidBasepoint,
    IntegrationFailure,
    IllConditioned,
    NotUnitary,
    CircleIntersectsSingularity,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every numerical failure in the library is reported through this type.
/// `kind()` lets callers (the CLI in particular) map failures onto exit codes.
class NumericError : public std::runtime_error {
public:
    NumericError(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

    /// True for failures caused by bad inputs rather than by the numerics.
    bool is_input_error() const noexcept
    {
        return kind_ == ErrorKind::InvalidTau || kind_ == ErrorKind::InvalidArgument ||
               kind_ == ErrorKind::HalfLatticeInput || kind_ == ErrorKind::UnsupportedIndex;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw NumericError(kind, what);
}

} // namespace ptorus
