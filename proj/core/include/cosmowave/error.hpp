#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cosmowave {

enum class ErrorCode {
    NonPositiveTime,
    OutOfRange,
    SolverDiverged,
    SeedTooLarge,
    WrongType,
    TailTooLarge,
    GridMismatch,
    UnsupportedMetric,
    CFLViolation,
    NotConverged,
    MethodMismatch,
    QuadratureFail,
    InsufficientSamples,
    DenominatorZero,
    WrongRegime,
    DegenerateData,
    CertificateFail,
    ConfigInvalid,
    InvalidArgument,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported through this exception; the CLI maps
// `code()` onto process exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Message used whenever a check is refused in the stiff case.
inline constexpr std::string_view kStiffRefusal =
    "not available for gamma = 2: in the stiff case the rescaled energy no longer "
    "converges (h(t) diverges logarithmically), so the energy-convergence route "
    "behind this check fails";

}  // namespace cosmowave
