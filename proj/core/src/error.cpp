#include "cosmowave/error.hpp"

namespace cosmowave {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonPositiveTime: return "NonPositiveTime";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::SolverDiverged: return "SolverDiverged";
        case ErrorCode::SeedTooLarge: return "SeedTooLarge";
        case ErrorCode::WrongType: return "WrongType";
        case ErrorCode::TailTooLarge: return "TailTooLarge";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::UnsupportedMetric: return "UnsupportedMetric";
        case ErrorCode::CFLViolation: return "CFLViolation";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::MethodMismatch: return "MethodMismatch";
        case ErrorCode::QuadratureFail: return "QuadratureFail";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::DenominatorZero: return "DenominatorZero";
        case ErrorCode::WrongRegime: return "WrongRegime";
        case ErrorCode::DegenerateData: return "DegenerateData";
        case ErrorCode::CertificateFail: return "CertificateFail";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace cosmowave
