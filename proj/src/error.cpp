#include "repvar/error.hpp"

namespace repvar {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidSample: return "InvalidSample";
    case ErrorCode::UnconstructibleOrder: return "UnconstructibleOrder";
    case ErrorCode::InsufficientBalancedColumns: return "InsufficientBalancedColumns";
    case ErrorCode::TooFewZones: return "TooFewZones";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::OddReplicateCount: return "OddReplicateCount";
    case ErrorCode::DegenerateContrasts: return "DegenerateContrasts";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::SchemeMismatch: return "SchemeMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingPair: return "MissingPair";
    case ErrorCode::DuplicatePsu: return "DuplicatePsu";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace repvar
