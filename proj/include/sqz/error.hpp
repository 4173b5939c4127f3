#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqz {

enum class ErrorCode {
    NonPositiveInput,
    ZeroCoupling,
    NegativeIntensity,
    EqualOrderings,
    NonPositiveDiffusion,
    SingularPivot,
    SingularResolvent,
    UnstableState,
    DivergentIntegral,
    TrajectoryDiverged,
    InsufficientData,
    InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::ZeroCoupling: return "ZeroCoupling";
    case ErrorCode::NegativeIntensity: return "NegativeIntensity";
    case ErrorCode::EqualOrderings: return "EqualOrderings";
    case ErrorCode::NonPositiveDiffusion: return "NonPositiveDiffusion";
    case ErrorCode::SingularPivot: return "SingularPivot";
    case ErrorCode::SingularResolvent: return "SingularResolvent";
    case ErrorCode::UnstableState: return "UnstableState";
    case ErrorCode::DivergentIntegral: return "DivergentIntegral";
    case ErrorCode::TrajectoryDiverged: return "TrajectoryDiverged";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

// Every failure in the library is reported through this type; the code lets
// callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void ensure(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) {
        throw Error(code, what);
    }
}

} // namespace sqz
